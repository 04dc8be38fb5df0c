"""Counter-based random streams keyed by integer paths.

Every stochastic component draws from ``stream(seed, *path)`` so results
are reproducible independently of execution order or thread count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(*key: int) -> np.random.Generator:
    """A Philox generator deterministically keyed by a tuple of integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))
