# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot inner loops: inverted-list scanning and
nearest-centroid assignment.

Contract mirrors pairmine._kernels._numpy: float64 squared-L2 accumulation
over float32 inputs, distance ties broken by ascending external id.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def assign_nearest(points, centroids):
    cdef cnp.ndarray[cnp.float32_t, ndim=2, mode="c"] x = np.ascontiguousarray(points, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=2, mode="c"] c = np.ascontiguousarray(centroids, dtype=np.float32)
    cdef Py_ssize_t n = x.shape[0], k = c.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dists = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j, t
    cdef double best, acc, diff
    cdef Py_ssize_t best_j
    for i in range(n):
        best = -1.0
        best_j = 0
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = <double>x[i, t] - <double>c[j, t]
                acc += diff * diff
            if best < 0.0 or acc < best:
                best = acc
                best_j = j
        labels[i] = best_j
        dists[i] = best
    return labels, dists


def scan_lists(query, vecs, ids, starts, ends, k):
    cdef cnp.ndarray[cnp.float32_t, ndim=1, mode="c"] q = np.ascontiguousarray(query, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=2, mode="c"] v = vecs
    cdef cnp.ndarray[cnp.int64_t, ndim=1] xid = np.ascontiguousarray(ids, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] s = np.ascontiguousarray(starts, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] e = np.ascontiguousarray(ends, dtype=np.int64)
    cdef Py_ssize_t d = q.shape[0]
    cdef Py_ssize_t kk = k
    if kk <= 0:
        raise ValueError("k must be positive")

    # Bounded insertion buffer ordered by (distance, id). `size` grows to kk.
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bd = np.empty(kk, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bi = np.empty(kk, dtype=np.int64)
    cdef Py_ssize_t size = 0
    cdef Py_ssize_t r, row, t, pos, m
    cdef Py_ssize_t ri
    cdef double acc, diff
    cdef long long cur_id
    for r in range(s.shape[0]):
        for row in range(s[r], e[r]):
            acc = 0.0
            for t in range(d):
                diff = <double>v[row, t] - <double>q[t]
                acc += diff * diff
            cur_id = xid[row]
            if size == kk:
                if acc > bd[size - 1] or (acc == bd[size - 1] and cur_id >= bi[size - 1]):
                    continue
            # binary search for insertion point in (distance, id) order
            pos = 0
            m = size
            while pos < m:
                ri = (pos + m) // 2
                if bd[ri] < acc or (bd[ri] == acc and bi[ri] < cur_id):
                    pos = ri + 1
                else:
                    m = ri
            if size < kk:
                size += 1
            for ri in range(size - 1, pos, -1):
                bd[ri] = bd[ri - 1]
                bi[ri] = bi[ri - 1]
            if pos < size:
                bd[pos] = acc
                bi[pos] = cur_id
    return bi[:size].copy(), bd[:size].copy()
