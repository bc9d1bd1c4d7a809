"""Pure NumPy fallback for :mod:`halfline._kernels` (same arithmetic, more memory)."""

import numpy as np
from scipy.linalg import toeplitz


def volterra_sweep(B, qh, tail, delta):
    """One in-place successive-approximation step; returns the max-norm update."""
    half = 0.5 * delta
    Q = toeplitz(qh, np.zeros_like(qh))
    G = Q * B
    C1 = np.zeros_like(G)
    C1[:, 1:] = np.cumsum(half * (G[:, 1:] + G[:, :-1]), axis=1)
    acc = np.zeros_like(G)
    acc[:-1] = np.cumsum((half * (C1[:-1] + C1[1:]))[::-1], axis=0)[::-1]
    new = np.tril(0.5 * tail[:, None] + acc)
    upd = float(np.max(np.abs(new - B)))
    B[...] = new
    return upd
