# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geometry kernels (twin of `_kernels_py`).

Every routine mirrors the NumPy backend op-for-op in float64, including tie
breaking by lowest index, so results are bitwise identical across backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

BACKEND = "cython"


def farthest_point_sample(cnp.ndarray[cnp.float64_t, ndim=2] points, int m, int start):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.full(n, INFINITY, dtype=np.float64)
    cdef Py_ssize_t cur = start
    cdef Py_ssize_t i, j, d
    cdef double dd, delta, best
    cdef Py_ssize_t best_idx
    for i in range(m):
        out[i] = cur
        d2[cur] = -1.0
        if i + 1 == m:
            break
        best = -2.0
        best_idx = 0
        for j in range(n):
            if d2[j] >= 0.0:
                dd = 0.0
                for d in range(dim):
                    delta = points[j, d] - points[cur, d]
                    dd += delta * delta
                if dd < d2[j]:
                    d2[j] = dd
            if d2[j] > best:
                best = d2[j]
                best_idx = j
        cur = best_idx
    return out


def knn_batch(cnp.ndarray[cnp.float64_t, ndim=2] queries, cnp.ndarray[cnp.float64_t, ndim=2] points, int k):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((nq, k), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t qi, j, d, sel
    cdef double dd, delta, best
    cdef Py_ssize_t best_idx
    for qi in range(nq):
        for j in range(n):
            dd = 0.0
            for d in range(dim):
                delta = points[j, d] - queries[qi, d]
                dd += delta * delta
            d2[j] = dd
            used[j] = 0
        # selection with strict < keeps the lowest index on ties, matching
        # a stable argsort
        for sel in range(k):
            best = INFINITY
            best_idx = -1
            for j in range(n):
                if not used[j] and d2[j] < best:
                    best = d2[j]
                    best_idx = j
            out[qi, sel] = best_idx
            used[best_idx] = 1
    return out


def segment_min_dist(cnp.ndarray[cnp.float64_t, ndim=2] points,
                     cnp.ndarray[cnp.float64_t, ndim=2] seg_a,
                     cnp.ndarray[cnp.float64_t, ndim=2] seg_b):
    cdef Py_ssize_t np_ = points.shape[0]
    cdef Py_ssize_t ns = seg_a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(np_, dtype=np.float64)
    cdef Py_ssize_t i, s
    cdef double abx, aby, ab2, apx, apy, t, cx, cy, dx, dy, d2, best
    for i in range(np_):
        best = INFINITY
        for s in range(ns):
            abx = seg_b[s, 0] - seg_a[s, 0]
            aby = seg_b[s, 1] - seg_a[s, 1]
            ab2 = abx * abx + aby * aby
            if ab2 == 0.0:
                ab2 = 1.0
            apx = points[i, 0] - seg_a[s, 0]
            apy = points[i, 1] - seg_a[s, 1]
            t = (apx * abx + apy * aby) / ab2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            cx = seg_a[s, 0] + t * abx
            cy = seg_a[s, 1] + t * aby
            dx = points[i, 0] - cx
            dy = points[i, 1] - cy
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
        out[i] = sqrt(best)
    return out


def polyline_parity(cnp.ndarray[cnp.float64_t, ndim=2] points,
                    cnp.ndarray[cnp.float64_t, ndim=2] seg_a,
                    cnp.ndarray[cnp.float64_t, ndim=2] seg_b):
    cdef Py_ssize_t np_ = points.shape[0]
    cdef Py_ssize_t ns = seg_a.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(np_, dtype=np.uint8)
    cdef Py_ssize_t i, s
    cdef double qx, qy, xa, ya, xb, yb, xint
    cdef int crossings
    for i in range(np_):
        qx = points[i, 0]
        qy = points[i, 1]
        crossings = 0
        for s in range(ns):
            xa = seg_a[s, 0]
            ya = seg_a[s, 1]
            xb = seg_b[s, 0]
            yb = seg_b[s, 1]
            if (ya > qy) != (yb > qy):
                xint = xa + (qy - ya) * (xb - xa) / (yb - ya)
                if qx < xint:
                    crossings += 1
        out[i] = crossings % 2
    return out.view(np.bool_)
