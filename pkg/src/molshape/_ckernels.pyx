# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same signatures and results as ``_pykernels``."""
import numpy as np

from libc.math cimport sqrt, cbrt, fabs, M_PI

cdef double SKEW_FLOOR = 1e-13  # keep in step with _pykernels


def real_sh_matrix(dirs, int L):
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef int ncol = (L + 1) * (L + 1)
    out_arr = np.empty((n, ncol), dtype=np.float64)
    cdef double[:, ::1] out = out_arr

    # per-order recurrence constants, shared by all points
    cdef double[::1] qmm = np.empty(L + 1)
    cdef double[:, ::1] ca = np.zeros((L + 1, L + 1))
    cdef double[:, ::1] cb = np.zeros((L + 1, L + 1))
    cdef int l, m, base
    cdef double sqrt2 = sqrt(2.0)
    qmm[0] = 1.0 / sqrt(4.0 * M_PI)
    for m in range(1, L + 1):
        qmm[m] = qmm[m - 1] * sqrt((2.0 * m + 1.0) / (2.0 * m))
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            ca[l, m] = sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            cb[l, m] = sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0))

    cdef Py_ssize_t i
    cdef double x, y, z, c, s, ct, q, q1, q2
    with nogil:
        for i in range(n):
            x = d[i, 0]
            y = d[i, 1]
            z = d[i, 2]
            c = 1.0
            s = 0.0
            for m in range(L + 1):
                if m > 0:
                    ct = x * c - y * s
                    s = x * s + y * c
                    c = ct
                q2 = 0.0
                q1 = qmm[m]
                for l in range(m, L + 1):
                    if l == m:
                        q = q1
                    elif l == m + 1:
                        q = sqrt(2.0 * m + 3.0) * z * q1
                        q2 = q1
                        q1 = q
                    else:
                        q = ca[l, m] * (z * q1 - cb[l, m] * q2)
                        q2 = q1
                        q1 = q
                    base = l * l + l
                    if m == 0:
                        out[i, base] = q
                    else:
                        out[i, base + m] = sqrt2 * q * c
                        out[i, base - m] = sqrt2 * q * s
    return out_arr


def legendre_matrix(x, int kmax):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_arr = np.empty((n, kmax + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef int k
    cdef double t
    with nogil:
        for i in range(n):
            t = xv[i]
            out[i, 0] = 1.0
            if kmax >= 1:
                out[i, 1] = t
            for k in range(2, kmax + 1):
                out[i, k] = ((2.0 * k - 1.0) * t * out[i, k - 1] - (k - 1.0) * out[i, k - 2]) / k
    return out_arr


def usr_moments(points, anchors):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t na = a.shape[0]
    out_arr = np.empty(3 * na, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] dist = np.empty(n)
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, mean, m2, m3, dev, dmax
    with nogil:
        for j in range(na):
            mean = 0.0
            dmax = 0.0
            for i in range(n):
                dx = p[i, 0] - a[j, 0]
                dy = p[i, 1] - a[j, 1]
                dz = p[i, 2] - a[j, 2]
                dist[i] = sqrt(dx * dx + dy * dy + dz * dz)
                mean += dist[i]
                if dist[i] > dmax:
                    dmax = dist[i]
            mean /= n
            m2 = 0.0
            m3 = 0.0
            for i in range(n):
                dev = dist[i] - mean
                m2 += dev * dev
                m3 += dev * dev * dev
            out[3 * j] = mean
            out[3 * j + 1] = sqrt(m2 / n)
            m3 /= n
            if fabs(m3) <= SKEW_FLOOR * dmax * dmax * dmax:
                m3 = 0.0
            out[3 * j + 2] = cbrt(m3)
    return out_arr
