"""Numba kernels for the penalized-path statistics.

Both kernels work in covariance form: they take the augmented Gram matrix
``G = A.T A`` and correlations ``c0 = A.T y`` and track entry values on a
descending penalty grid with warm starts.  ``G`` must be symmetric; rows
are used for the incremental correlation updates.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def lasso_entry_grid(G, c0, diag_g, lams, tol, max_sweeps):
    """Cyclic coordinate descent down a penalty grid.

    Returns ``(entry, fail)`` where ``entry[j]`` is the largest grid value
    at which coefficient ``j`` is nonzero (0 if never) and ``fail`` is the
    grid index of the first non-converged solve (-1 if none).
    """
    d = c0.shape[0]
    b = np.zeros(d)
    c = c0.copy()  # c = c0 - G @ b, maintained incrementally
    entry = np.zeros(d)
    fail = -1
    for li in range(lams.shape[0]):
        lam = lams[li]
        converged = False
        for _ in range(max_sweeps):
            max_delta = 0.0
            for j in range(d):
                bj = b[j]
                rho = c[j] + diag_g[j] * bj
                if rho > lam:
                    bn = (rho - lam) / diag_g[j]
                elif rho < -lam:
                    bn = (rho + lam) / diag_g[j]
                else:
                    bn = 0.0
                delta = bn - bj
                if delta != 0.0:
                    b[j] = bn
                    for k in range(d):
                        c[k] -= G[j, k] * delta
                    ad = abs(delta)
                    if ad > max_delta:
                        max_delta = ad
            if max_delta < tol:
                converged = True
                break
        if not converged:
            fail = li
            break
        for j in range(d):
            if entry[j] == 0.0 and b[j] != 0.0:
                entry[j] = lam
    return entry, fail


@njit(inline="always")
def _block_solve(z, w, thr, eigvals_row, eigvecs, off, zt, out):
    """Exact minimizer of 0.5 x'Qx - z'x + thr|x| for one block.

    Uses the eigendecomposition Q = V diag(eigvals) V' (packed row-major in
    ``eigvecs`` at ``off``) and Newton iteration on the norm equation.
    """
    nz = 0.0
    for a in range(w):
        nz += z[a] * z[a]
    nz = np.sqrt(nz)
    if nz <= thr:
        for a in range(w):
            out[a] = 0.0
        return
    for col in range(w):
        acc = 0.0
        for r in range(w):
            acc += eigvecs[off + r * w + col] * z[r]
        zt[col] = acc
    nu = (nz - thr) / eigvals_row[w - 1]
    for _ in range(60):
        psi = -1.0
        dpsi = 0.0
        for a in range(w):
            den = eigvals_row[a] * nu + thr
            t1 = zt[a] / den
            psi += t1 * t1
            dpsi -= 2.0 * t1 * t1 * eigvals_row[a] / den
        step = psi / dpsi
        nu -= step
        if abs(psi) < 1e-13 or abs(step) < 1e-15 * (1.0 + nu):
            break
    for a in range(w):
        zt[a] = zt[a] * nu / (eigvals_row[a] * nu + thr)
    for r in range(w):
        acc = 0.0
        for col in range(w):
            acc += eigvecs[off + r * w + col] * zt[col]
        out[r] = acc


@njit(cache=True)
def group_lasso_entry_grid(G, c0, starts, ends, wts, eigvals, eigvecs, vec_off, lams, tol, max_sweeps):
    """Block coordinate descent for the weighted group Lasso down a grid.

    Blocks are contiguous column ranges ``starts[i]:ends[i]`` with penalty
    weights ``wts``.  Each block visit solves its subproblem exactly: a
    block is zero when its partial-residual correlation norm is below
    ``lam * wts[i]``; otherwise the group soft-threshold condition
    ``(Q + (thr/|x|) I) x = z`` is solved through the block Gram
    eigendecomposition (rows of ``eigvals``, packed row-major ``eigvecs``)
    with Newton iteration on the norm ``|x|``.
    """
    d = c0.shape[0]
    nb = starts.shape[0]
    b = np.zeros(d)
    c = c0.copy()  # c = c0 - G @ b
    entry = np.zeros(nb)
    max_blk = 0
    for i in range(nb):
        w = ends[i] - starts[i]
        if w > max_blk:
            max_blk = w
    z = np.empty(max_blk)
    zt = np.empty(max_blk)
    bn = np.empty(max_blk)
    fail = -1
    for li in range(lams.shape[0]):
        lam = lams[li]
        converged = False
        for _ in range(max_sweeps):
            max_delta = 0.0
            for bi in range(nb):
                s0 = starts[bi]
                w = ends[bi] - s0
                for a in range(w):
                    acc = c[s0 + a]
                    for col in range(w):
                        acc += G[s0 + a, s0 + col] * b[s0 + col]
                    z[a] = acc
                _block_solve(z, w, lam * wts[bi], eigvals[bi], eigvecs, vec_off[bi], zt, bn)
                blk_delta = 0.0
                for a in range(w):
                    delta = bn[a] - b[s0 + a]
                    if delta != 0.0:
                        b[s0 + a] = bn[a]
                        for k in range(d):
                            c[k] -= G[s0 + a, k] * delta
                        ad = abs(delta)
                        if ad > blk_delta:
                            blk_delta = ad
                if blk_delta > max_delta:
                    max_delta = blk_delta
            if max_delta < tol:
                converged = True
                break
        if not converged:
            fail = li
            break
        for bi in range(nb):
            if entry[bi] == 0.0:
                nrm = 0.0
                for a in range(starts[bi], ends[bi]):
                    nrm += b[a] * b[a]
                if nrm > 0.0:
                    entry[bi] = lam
    return entry, fail
