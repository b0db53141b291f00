"""Hot pairwise kernels with a compiled fast path.

The compiled extension (varioscreen._fastpath, Cython) is preferred when it
imported cleanly; otherwise the numpy implementations below are used.  Both
paths produce bit-identical float64 results (the extension is compiled with
-ffp-contract=off so the sum-of-squares association order matches numpy's).

Set VARIOSCREEN_PURE=1 to force the numpy path, e.g. for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("VARIOSCREEN_PURE"):
        _fastpath = None
    else:
        from varioscreen import _fastpath
except ImportError:
    _fastpath = None


def active_backend() -> str:
    """Name of the kernel backend in use: 'compiled' or 'numpy'."""
    return "compiled" if _fastpath is not None else "numpy"


def pairwise_cloud_numpy(fixed: np.ndarray, disp: np.ndarray):
    """All unordered landmark pairs (i < j), their fixed-point separation h
    and squared displacement difference eps.

    Returns (i, j, h, eps): int64/int64/float64/float64 arrays of length
    K(K-1)/2, in row-major (i outer, j inner) pair order.
    """
    k = fixed.shape[0]
    i, j = np.triu_indices(k, 1)
    df = fixed[i] - fixed[j]
    h = np.sqrt((df * df).sum(axis=1))
    dd = disp[i] - disp[j]
    eps = (dd * dd).sum(axis=1)
    return i.astype(np.int64), j.astype(np.int64), h, eps


def nn_distances_numpy(fixed: np.ndarray) -> np.ndarray:
    """Euclidean nearest-neighbour distance of every point, length K."""
    diff = fixed[:, None, :] - fixed[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return np.sqrt(d2.min(axis=1))


def pairwise_cloud(fixed: np.ndarray, disp: np.ndarray):
    fixed = np.ascontiguousarray(fixed, dtype=np.float64)
    disp = np.ascontiguousarray(disp, dtype=np.float64)
    if _fastpath is not None:
        return _fastpath.pairwise_cloud(fixed, disp)
    return pairwise_cloud_numpy(fixed, disp)


def nn_distances(fixed: np.ndarray) -> np.ndarray:
    fixed = np.ascontiguousarray(fixed, dtype=np.float64)
    if _fastpath is not None:
        return _fastpath.nn_distances(fixed)
    return nn_distances_numpy(fixed)
