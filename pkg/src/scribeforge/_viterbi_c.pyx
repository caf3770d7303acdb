# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Viterbi fill; bit-identical twin of ``_viterbi_py``."""

import numpy as np

from libc.math cimport INFINITY
from libc.stdint cimport int64_t


cdef inline bint _better(int64_t cnt_a, double val_a,
                         int64_t cnt_b, double val_b) noexcept nogil:
    if val_a == -INFINITY:
        return False
    if val_b == -INFINITY:
        return True
    if cnt_a != cnt_b:
        return cnt_a < cnt_b
    return val_a > val_b


def viterbi_fill(double[:, ::1] val, unsigned char[:, ::1] floored,
                 unsigned char[::1] skip, signed char[:, ::1] bp):
    """Forward max pass; see the pure-Python kernel for the contract."""
    cdef Py_ssize_t n = val.shape[0]
    cdef Py_ssize_t s = val.shape[1]
    prev_val_arr = np.full(s, -np.inf)
    prev_cnt_arr = np.zeros(s, dtype=np.int64)
    cur_val_arr = np.empty(s)
    cur_cnt_arr = np.empty(s, dtype=np.int64)
    cdef double[::1] prev_val = prev_val_arr
    cdef int64_t[::1] prev_cnt = prev_cnt_arr
    cdef double[::1] cur_val = cur_val_arr
    cdef int64_t[::1] cur_cnt = cur_cnt_arr
    cdef double[::1] tmp_val
    cdef int64_t[::1] tmp_cnt
    cdef Py_ssize_t t, k
    cdef double best_val
    cdef int64_t best_cnt
    cdef signed char off

    prev_val[0] = val[0, 0]
    prev_cnt[0] = floored[0, 0]
    if s > 1:
        prev_val[1] = val[0, 1]
        prev_cnt[1] = floored[0, 1]
    for k in range(s):
        bp[0, k] = 0

    with nogil:
        for t in range(1, n):
            for k in range(s):
                best_val = prev_val[k]
                best_cnt = prev_cnt[k]
                off = 0
                if k >= 1 and _better(prev_cnt[k - 1], prev_val[k - 1],
                                      best_cnt, best_val):
                    best_val = prev_val[k - 1]
                    best_cnt = prev_cnt[k - 1]
                    off = 1
                if k >= 2 and skip[k] and _better(prev_cnt[k - 2],
                                                  prev_val[k - 2],
                                                  best_cnt, best_val):
                    best_val = prev_val[k - 2]
                    best_cnt = prev_cnt[k - 2]
                    off = 2
                if best_val == -INFINITY:
                    cur_val[k] = -INFINITY
                    cur_cnt[k] = 0
                else:
                    cur_val[k] = best_val + val[t, k]
                    cur_cnt[k] = best_cnt + floored[t, k]
                bp[t, k] = off
            tmp_val = prev_val
            prev_val = cur_val
            cur_val = tmp_val
            tmp_cnt = prev_cnt
            prev_cnt = cur_cnt
            cur_cnt = tmp_cnt

    out_cnt = np.empty(s, dtype=np.int64)
    out_val = np.empty(s)
    for k in range(s):
        out_cnt[k] = prev_cnt[k]
        out_val[k] = prev_val[k]
    return out_cnt, out_val
