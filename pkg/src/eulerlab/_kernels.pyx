# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pairwise kernels: free-space and disk-image Biot-Savart sums.

Semantics must match _kernels_np.py exactly; both are cross-checked in the
test suite and compared in benchmarks/bench_kernels.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925287


def free_velocity(cnp.ndarray[double, ndim=2] src_a,
                  cnp.ndarray[double, ndim=1] gam_a,
                  cnp.ndarray[double, ndim=2] tgt_a,
                  double self_eps=1e-14):
    cdef double[:, ::1] src = np.ascontiguousarray(src_a)
    cdef double[::1] gam = np.ascontiguousarray(gam_a)
    cdef double[:, ::1] tgt = np.ascontiguousarray(tgt_a)
    cdef Py_ssize_t P = src.shape[0], M = tgt.shape[0]
    out_a = np.zeros((M, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_a
    cdef Py_ssize_t i, j
    cdef double tx, ty, dx, dy, r2, f, ux, uy, eps2
    eps2 = self_eps * self_eps
    for i in range(M):
        tx = tgt[i, 0]
        ty = tgt[i, 1]
        ux = 0.0
        uy = 0.0
        for j in range(P):
            dx = tx - src[j, 0]
            dy = ty - src[j, 1]
            r2 = dx * dx + dy * dy
            if r2 > eps2:
                f = gam[j] / (TWO_PI * r2)
                ux -= f * dy
                uy += f * dx
        out[i, 0] = ux
        out[i, 1] = uy
    return out_a


def disk_velocity(cnp.ndarray[double, ndim=2] src_a,
                  cnp.ndarray[double, ndim=1] gam_a,
                  cnp.ndarray[double, ndim=2] tgt_a,
                  double R=1.0,
                  double self_eps=1e-14):
    cdef double[:, ::1] src = np.ascontiguousarray(src_a)
    cdef double[::1] gam = np.ascontiguousarray(gam_a)
    cdef double[:, ::1] tgt = np.ascontiguousarray(tgt_a)
    cdef Py_ssize_t P = src.shape[0], M = tgt.shape[0]
    out_a = np.zeros((M, 2), dtype=np.float64)
    cdef double[:, ::1] out = out_a
    cdef Py_ssize_t i, j
    cdef double tx, ty, dx, dy, r2, f, ux, uy, eps2, s2, ix, iy, R2
    eps2 = self_eps * self_eps
    R2 = R * R
    for i in range(M):
        tx = tgt[i, 0]
        ty = tgt[i, 1]
        ux = 0.0
        uy = 0.0
        for j in range(P):
            dx = tx - src[j, 0]
            dy = ty - src[j, 1]
            r2 = dx * dx + dy * dy
            if r2 > eps2:
                f = gam[j] / (TWO_PI * r2)
                ux -= f * dy
                uy += f * dx
            s2 = src[j, 0] * src[j, 0] + src[j, 1] * src[j, 1]
            if s2 > 1e-30:
                ix = R2 * src[j, 0] / s2
                iy = R2 * src[j, 1] / s2
                dx = tx - ix
                dy = ty - iy
                r2 = dx * dx + dy * dy
                f = gam[j] / (TWO_PI * r2)
                ux += f * dy
                uy -= f * dx
        out[i, 0] = ux
        out[i, 1] = uy
    return out_a


def min_pair_distance(cnp.ndarray[double, ndim=2] pts_a):
    cdef double[:, ::1] pts = np.ascontiguousarray(pts_a)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, d2, best = 1e308
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
    return sqrt(best)
