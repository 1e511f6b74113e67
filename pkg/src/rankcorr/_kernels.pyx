# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels; same contract as ``rankcorr._kernels_py``.

Counts are accumulated in 64-bit integers. The weighted sum is bounded by
n(n-1)(2n-1)/6, which fits for n up to ``MAX_N``; larger inputs raise
``OverflowError`` so the caller can fall back to exact Python integers.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, calloc, free

ctypedef cnp.int64_t i64

MAX_N = 3_000_000


cdef inline const i64[::1] _as_i64(ranks):
    return np.ascontiguousarray(ranks, dtype=np.int64)


def concordant_count_naive(ranks):
    cdef const i64[::1] r = _as_i64(ranks)
    cdef Py_ssize_t n = r.shape[0], i, j
    cdef i64 total = 0, ri
    with nogil:
        for i in range(1, n):
            ri = r[i]
            for j in range(i):
                if r[j] < ri:
                    total += 1
    return int(total)


def concordant_count(ranks):
    cdef const i64[::1] r = _as_i64(ranks)
    cdef Py_ssize_t n = r.shape[0]
    cdef i64 *a = <i64 *> malloc(n * sizeof(i64) + 1)
    cdef i64 *b = <i64 *> malloc(n * sizeof(i64) + 1)
    cdef i64 *tmp
    cdef Py_ssize_t width, lo, mid, hi, i, j, k
    cdef i64 inversions = 0
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    with nogil:
        for i in range(n):
            a[i] = r[i]
        width = 1
        while width < n:
            lo = 0
            while lo < n:
                mid = lo + width if lo + width < n else n
                hi = lo + 2 * width if lo + 2 * width < n else n
                i = lo
                j = mid
                k = lo
                while i < mid and j < hi:
                    if a[i] <= a[j]:
                        b[k] = a[i]
                        i += 1
                    else:
                        b[k] = a[j]
                        inversions += mid - i
                        j += 1
                    k += 1
                while i < mid:
                    b[k] = a[i]
                    i += 1
                    k += 1
                while j < hi:
                    b[k] = a[j]
                    j += 1
                    k += 1
                lo += 2 * width
            tmp = a
            a = b
            b = tmp
            width *= 2
    free(a)
    free(b)
    return int(n * (n - 1) // 2 - inversions)


def weighted_t_naive(ranks):
    cdef const i64[::1] r = _as_i64(ranks)
    cdef Py_ssize_t n = r.shape[0], i, j
    if n > MAX_N:
        raise OverflowError("n too large for 64-bit accumulation")
    cdef i64 total = 0, ri
    with nogil:
        for i in range(1, n):
            ri = r[i]
            for j in range(i):
                if r[j] <= ri:
                    # 0-based positions: weight n - (i + 1) + (j + 1)
                    total += n - i + j
    return int(total)


def weighted_t(ranks):
    cdef const i64[::1] r = _as_i64(ranks)
    cdef Py_ssize_t n = r.shape[0], i, k
    if n > MAX_N:
        raise OverflowError("n too large for 64-bit accumulation")
    cdef i64 *cnt = <i64 *> calloc(n + 1, sizeof(i64))
    cdef i64 *pos = <i64 *> calloc(n + 1, sizeof(i64))
    cdef i64 total = 0, c, s
    if cnt == NULL or pos == NULL:
        free(cnt)
        free(pos)
        raise MemoryError()
    with nogil:
        for i in range(1, n + 1):
            c = 0
            s = 0
            k = r[i - 1]
            while k > 0:
                c += cnt[k]
                s += pos[k]
                k -= k & -k
            total += (n - i) * c + s
            k = r[i - 1]
            while k <= n:
                cnt[k] += 1
                pos[k] += i
                k += k & -k
    free(cnt)
    free(pos)
    return int(total)
