# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernels.  Must stay bit-identical to the numpy
fallbacks in varioscreen.kernels: same operation order, no FP contraction."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()


def pairwise_cloud(double[:, ::1] fixed, double[:, ::1] disp):
    cdef Py_ssize_t k = fixed.shape[0]
    cdef Py_ssize_t m = k * (k - 1) // 2
    i_out = np.empty(m, dtype=np.int64)
    j_out = np.empty(m, dtype=np.int64)
    h_out = np.empty(m, dtype=np.float64)
    eps_out = np.empty(m, dtype=np.float64)
    cdef cnp.int64_t[::1] iv = i_out
    cdef cnp.int64_t[::1] jv = j_out
    cdef double[::1] hv = h_out
    cdef double[::1] ev = eps_out
    cdef Py_ssize_t i, j, n = 0
    cdef double dx, dy, dz
    for i in range(k):
        for j in range(i + 1, k):
            dx = fixed[i, 0] - fixed[j, 0]
            dy = fixed[i, 1] - fixed[j, 1]
            dz = fixed[i, 2] - fixed[j, 2]
            hv[n] = sqrt((dx * dx + dy * dy) + dz * dz)
            dx = disp[i, 0] - disp[j, 0]
            dy = disp[i, 1] - disp[j, 1]
            dz = disp[i, 2] - disp[j, 2]
            ev[n] = (dx * dx + dy * dy) + dz * dz
            iv[n] = i
            jv[n] = j
            n += 1
    return i_out, j_out, h_out, eps_out


def nn_distances(double[:, ::1] fixed):
    cdef Py_ssize_t k = fixed.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, d2, best
    for i in range(k):
        best = INFINITY
        for j in range(k):
            if i == j:
                continue
            dx = fixed[i, 0] - fixed[j, 0]
            dy = fixed[i, 1] - fixed[j, 1]
            dz = fixed[i, 2] - fixed[j, 2]
            d2 = (dx * dx + dy * dy) + dz * dz
            if d2 < best:
                best = d2
        ov[i] = sqrt(best)
    return out
