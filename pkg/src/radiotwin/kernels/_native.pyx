# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: pairwise distances, k-NN selection, one-class SMO.

Semantics match radiotwin.kernels._python exactly: neighbor ties break by
ascending index, bound hits in the dual solver snap to exact values.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()


def pairwise_sq_dists(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], d = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    if b.shape[1] != d:
        raise ValueError("dimension mismatch")
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for t in range(d):
                diff = a[i, t] - b[j, t]
                acc += diff * diff
            o[i, j] = acc
    return out


cdef inline bint _worse(double d1, Py_ssize_t i1, double d2, Py_ssize_t i2) nogil:
    # lexicographic (distance, index) comparison: is entry 1 worse than 2?
    if d1 != d2:
        return d1 > d2
    return i1 > i2


cdef void _heap_sift_down(double* hd, Py_ssize_t* hi, Py_ssize_t k, Py_ssize_t pos) nogil:
    # max-heap on (distance, index): root is the worst kept neighbor
    cdef Py_ssize_t child
    cdef double dtmp
    cdef Py_ssize_t itmp
    while True:
        child = 2 * pos + 1
        if child >= k:
            return
        if child + 1 < k and _worse(hd[child + 1], hi[child + 1], hd[child], hi[child]):
            child += 1
        if _worse(hd[child], hi[child], hd[pos], hi[pos]):
            dtmp = hd[pos]; hd[pos] = hd[child]; hd[child] = dtmp
            itmp = hi[pos]; hi[pos] = hi[child]; hi[child] = itmp
            pos = child
        else:
            return


def knn_brute(double[:, ::1] ref, double[:, ::1] query, Py_ssize_t k,
              bint exclude_self=False):
    cdef Py_ssize_t n_ref = ref.shape[0], n_query = query.shape[0], d = ref.shape[1]
    cdef Py_ssize_t limit = n_ref - 1 if exclude_self else n_ref
    if query.shape[1] != d:
        raise ValueError("dimension mismatch")
    if k < 1 or k > limit:
        raise ValueError(f"k={k} out of range for {n_ref} reference points")

    cdef cnp.ndarray[cnp.int64_t, ndim=2] idx_out = np.empty((n_query, k), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dist_out = np.empty((n_query, k), dtype=np.float64)
    cdef long long[:, ::1] iv = idx_out
    cdef double[:, ::1] dv = dist_out

    cdef cnp.ndarray[cnp.float64_t, ndim=1] hd_arr = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hi_arr = np.empty(k, dtype=np.int64)
    cdef double* hd = <double*> cnp.PyArray_DATA(hd_arr)
    cdef Py_ssize_t* hi = <Py_ssize_t*> cnp.PyArray_DATA(hi_arr)

    cdef Py_ssize_t q, r, t, filled, pos, parent
    cdef double acc, diff
    cdef double dtmp
    cdef Py_ssize_t itmp

    for q in range(n_query):
        filled = 0
        for r in range(n_ref):
            if exclude_self and r == q:
                continue
            acc = 0.0
            for t in range(d):
                diff = query[q, t] - ref[r, t]
                acc += diff * diff
            if filled < k:
                # sift up into the max-heap
                pos = filled
                hd[pos] = acc
                hi[pos] = r
                filled += 1
                while pos > 0:
                    parent = (pos - 1) // 2
                    if _worse(hd[pos], hi[pos], hd[parent], hi[parent]):
                        dtmp = hd[pos]; hd[pos] = hd[parent]; hd[parent] = dtmp
                        itmp = hi[pos]; hi[pos] = hi[parent]; hi[parent] = itmp
                        pos = parent
                    else:
                        break
            elif _worse(hd[0], hi[0], acc, r):
                hd[0] = acc
                hi[0] = r
                _heap_sift_down(hd, hi, k, 0)
        # heap-sort the k entries into ascending (distance, index) order
        for pos in range(k - 1, 0, -1):
            dtmp = hd[0]; hd[0] = hd[pos]; hd[pos] = dtmp
            itmp = hi[0]; hi[0] = hi[pos]; hi[pos] = itmp
            _heap_sift_down(hd, hi, pos, 0)
        for pos in range(k):
            iv[q, pos] = hi[pos]
            dv[q, pos] = sqrt(hd[pos])
    return idx_out, dist_out


def min_sq_dist(double[:, ::1] ref, double[:, ::1] query):
    cdef Py_ssize_t n_ref = ref.shape[0], n_query = query.shape[0], d = ref.shape[1]
    if query.shape[1] != d:
        raise ValueError("dimension mismatch")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_query, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t q, r, t
    cdef double best, acc, diff
    for q in range(n_query):
        best = INFINITY
        for r in range(n_ref):
            acc = 0.0
            for t in range(d):
                diff = query[q, t] - ref[r, t]
                acc += diff * diff
                if acc >= best:
                    break
            if acc < best:
                best = acc
        ov[q] = best
    return out


def smo_one_class(double[:, ::1] gram, double box, double tol, long max_iter):
    cdef Py_ssize_t n = gram.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] grad = grad_arr

    cdef Py_ssize_t n_full = <Py_ssize_t> (1.0 / box + 1e-9)
    if n_full > n:
        n_full = n
    cdef Py_ssize_t i, j, t
    for i in range(n_full):
        alpha[i] = box
    cdef double remainder = 1.0 - n_full * box
    if remainder > 1e-12 and n_full < n:
        alpha[n_full] = remainder if remainder < box else box

    # grad = K @ alpha over the nonzero block
    cdef Py_ssize_t nz = n_full + (1 if (remainder > 1e-12 and n_full < n) else 0)
    for t in range(n):
        for i in range(nz):
            grad[t] += gram[t, i] * alpha[i]

    cdef double gap = INFINITY
    cdef long it = 0
    cdef double g_min, g_max, eta, step, room_i, room_j

    while it < max_iter:
        g_min = INFINITY
        g_max = -INFINITY
        i = -1
        j = -1
        for t in range(n):
            if alpha[t] < box and grad[t] < g_min:
                g_min = grad[t]
                i = t
            if alpha[t] > 0.0 and grad[t] > g_max:
                g_max = grad[t]
                j = t
        gap = g_max - g_min
        if gap <= tol:
            break
        eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        if eta <= 0.0:
            eta = 1e-12
        step = gap / eta
        room_i = box - alpha[i]
        room_j = alpha[j]
        if step >= room_i and room_i <= room_j:
            step = room_i
            alpha[i] = box
            alpha[j] = alpha[j] - step
        elif step >= room_j:
            step = room_j
            alpha[i] = alpha[i] + step
            alpha[j] = 0.0
        else:
            alpha[i] = alpha[i] + step
            alpha[j] = alpha[j] - step
        for t in range(n):
            grad[t] += step * gram[i, t]
        for t in range(n):
            grad[t] -= step * gram[j, t]
        it += 1

    # rho: mean decision value over free vectors, else feasible midpoint
    cdef double acc = 0.0
    cdef Py_ssize_t n_free = 0
    cdef double lower = -INFINITY, upper = INFINITY
    for t in range(n):
        if 0.0 < alpha[t] < box:
            acc += grad[t]
            n_free += 1
        if alpha[t] >= box and grad[t] > lower:
            lower = grad[t]
        if alpha[t] <= 0.0 and grad[t] < upper:
            upper = grad[t]
    cdef double rho
    if n_free > 0:
        rho = acc / n_free
    elif lower == -INFINITY:
        rho = upper
    elif upper == INFINITY:
        rho = lower
    else:
        rho = 0.5 * (lower + upper)
    if gap < 0.0:
        gap = 0.0
    return alpha_arr, rho, it, gap
