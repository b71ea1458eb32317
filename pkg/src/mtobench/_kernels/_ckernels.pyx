# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: non-dominated ranking, 2-D hypervolume, IGD distances."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def nondominated_ranks(objs):
    cdef double[:, ::1] o = np.ascontiguousarray(objs, dtype=np.float64)
    cdef Py_ssize_t n = o.shape[0], m = o.shape[1]
    cdef Py_ssize_t i, j, k, head, tail, nxt
    cdef bint i_better, j_better
    ranks_arr = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ranks_arr
    cdef long long[::1] ranks = ranks_arr
    count_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] count = count_arr
    # dominated lists stored as a dense boolean matrix
    dom_arr = np.zeros((n, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] dom = dom_arr
    for i in range(n):
        for j in range(i + 1, n):
            i_better = False
            j_better = False
            for k in range(m):
                if o[i, k] < o[j, k]:
                    i_better = True
                elif o[j, k] < o[i, k]:
                    j_better = True
                if i_better and j_better:
                    break
            if i_better and not j_better:
                dom[i, j] = 1
                count[j] += 1
            elif j_better and not i_better:
                dom[j, i] = 1
                count[i] += 1
    queue_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] queue = queue_arr
    tail = 0
    for i in range(n):
        if count[i] == 0:
            ranks[i] = 0
            queue[tail] = i
            tail += 1
    head = 0
    while head < tail:
        i = queue[head]
        head += 1
        for j in range(n):
            if dom[i, j]:
                count[j] -= 1
                if count[j] == 0:
                    ranks[j] = ranks[i] + 1
                    queue[tail] = j
                    tail += 1
    return ranks_arr


def hv2d(points, ref):
    pts_arr = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    cdef double r0 = float(ref[0]), r1 = float(ref[1])
    mask = (pts_arr[:, 0] < r0) & (pts_arr[:, 1] < r1)
    pts_arr = pts_arr[mask]
    if pts_arr.shape[0] == 0:
        return 0.0
    order = np.lexsort((pts_arr[:, 1], pts_arr[:, 0]))
    cdef double[:, ::1] p = np.ascontiguousarray(pts_arr[order])
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double area = 0.0, prev = r1
    for i in range(n):
        if p[i, 1] < prev:
            area += (r0 - p[i, 0]) * (prev - p[i, 1])
            prev = p[i, 1]
    return area


def min_distances(reference, achieved, plus=False):
    cdef double[:, ::1] r = np.ascontiguousarray(reference, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(achieved, dtype=np.float64)
    cdef Py_ssize_t nr = r.shape[0], na = a.shape[0], m = r.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best, s, d
    cdef bint clamp = bool(plus)
    out_arr = np.empty(nr, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(nr):
        best = INFINITY
        for j in range(na):
            s = 0.0
            for k in range(m):
                d = a[j, k] - r[i, k]
                if clamp and d < 0.0:
                    d = 0.0
                s += d * d
                if s >= best:
                    break
            if s < best:
                best = s
        out[i] = sqrt(best)
    return out_arr
