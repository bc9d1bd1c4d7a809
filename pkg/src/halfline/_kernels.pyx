# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sweep for the transformation-kernel Volterra equation.

Works on the characteristic grid u = (x+y)/2, v = (y-x)/2 with step
``delta``; ``B[m, n]`` holds A(u_m - v_n, u_m + v_n) for n <= m.  One call
performs one successive-approximation (Jacobi) step in place and returns the
max-norm of the update.  Only O(M) workspace is used.
"""

import numpy as np
from libc.math cimport fabs


def volterra_sweep(double[:, ::1] B, const double[::1] qh, const double[::1] tail, double delta):
    cdef Py_ssize_t M = B.shape[0] - 1
    cdef Py_ssize_t m, n
    cdef double[::1] c_prev = np.zeros(M + 2)
    cdef double[::1] c_cur = np.zeros(M + 2)
    cdef double[::1] swap
    cdef double[::1] acc = np.zeros(M + 2)
    cdef double half = 0.5 * delta
    cdef double g_prev, g, run, new, diff
    cdef double upd = 0.0
    for m in range(M, -1, -1):
        run = 0.0
        g_prev = qh[m] * B[m, 0]
        c_cur[0] = 0.0
        for n in range(1, m + 1):
            g = qh[m - n] * B[m, n]
            run = run + half * (g + g_prev)
            c_cur[n] = run
            g_prev = g
        for n in range(m + 1):
            if m < M:
                acc[n] = acc[n] + half * (c_cur[n] + c_prev[n])
            new = 0.5 * tail[m] + acc[n]
            diff = fabs(new - B[m, n])
            if diff > upd:
                upd = diff
            B[m, n] = new
        swap = c_prev
        c_prev = c_cur
        c_cur = swap
    return upd
