"""Three group-selection filters on a strongly correlated group design.

With within-group correlation 0.9, per-feature gaps are forced near zero
(any 0.9-correlated pair caps its smaller gap at ||X_i - X_j||^2), so
feature-level knockoffs lose power.  Working per group fixes this: the
PCA prototype filter builds knockoffs only for each group's leading
principal component, where the localized constraint allows unit gaps.
"""

import numpy as np

import knockoffs as ko
from knockoffs.groups import (
    GroupStructure,
    group_knockoff_filter,
    pca_prototype_filter,
    split_prototype_filter,
)
from knockoffs.simlab import DesignKind, DesignSpec, gen_design

rng = np.random.default_rng(5)
k, size = 12, 5
n, p = 360, k * size
X = gen_design(DesignSpec(DesignKind.GROUP_EQUI, n, (size,) * k, rho=0.9, gamma=0.0, seed=9))
groups = GroupStructure.from_sizes([size] * k)

true_groups = [0, 2, 4, 6]
beta = np.zeros(p)
for g in true_groups:
    beta[g * size] = rng.choice([-3.5, 3.5])
y = X @ beta + rng.standard_normal(n)

print(f"design: {n} x {p}, {k} groups of {size}, within-group correlation 0.9")
print(f"true groups: {true_groups}\n")

sv = ko.s_sdp(X.T @ X)
print(f"feature-level gaps are crushed by the correlation: median s = {np.median(sv.s):.3f}")

cfg = ko.PathConfig(num_lambda=500)
for name, result in (
    ("pca-prototype", pca_prototype_filter(X, y, groups, q=0.2, offset=ko.Offset.KNOCKOFF_PLUS,
                                           path_cfg=cfg)),
    ("group-knockoff", group_knockoff_filter(X, y, groups, q=0.2, offset=ko.Offset.KNOCKOFF_PLUS,
                                             cfg=cfg)),
    ("split-prototype", split_prototype_filter(X, y, groups, q=0.2, offset=ko.Offset.KNOCKOFF_PLUS,
                                               split_seed=1, path_cfg=cfg)),
):
    rep = ko.group_evaluate(result, true_groups)
    print(f"{name:>16}: selected groups {[int(g) for g in result.selected_groups]} "
          f"(power {rep.power:.2f}, fdp {rep.fdp:.2f})")

print("\nwhy the PCA filter wins: its prototype gaps after localization")
from knockoffs.groups import pca_prototype_model

proto = pca_prototype_model(X, groups)
print(f"s_P = {np.round(proto.localized.s_P, 3)} (vs feature-level median {np.median(sv.s):.3f})")
