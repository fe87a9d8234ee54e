# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backward-induction stage sweep.

Mirrors stochuc._kernels.fallback.stage_sweep exactly: same grid layout,
same window rules, same (value, z, u) tie-breaking.  Kept as plain C
loops; the whole sweep runs without the GIL so generator subproblems can
fan out over threads.
"""

import numpy as np

from libc.math cimport INFINITY, isfinite

DEF RAMP_TOL = 1e-9

BACKEND = "cython"


def stage_sweep(double[:, :, ::1] L_next, int[:, ::1] trans, double[:, ::1] prows,
                double[::1] lam, double[::1] b, double[::1] c, double[::1] q_val,
                int[:, ::1] y_next, double[:, ::1] y_startup,
                signed char[::1] u_floor, signed char[::1] headroom,
                double no_load, double ramp_up, double ramp_down,
                int terminal, int relax,
                double[:, :, ::1] L_out, short[:, :, ::1] z_out,
                signed char[:, :, ::1] u_out):
    cdef Py_ssize_t Y = L_next.shape[0]
    cdef Py_ssize_t Q = L_next.shape[1]
    cdef Py_ssize_t A = lam.shape[0]
    cdef Py_ssize_t R1 = trans.shape[1]
    cdef Py_ssize_t K = b.shape[0] - 1
    cdef Py_ssize_t y, y2, q, a, r, k, kk, u
    cdef int k_lo, k_hi, kh, cap_k, bk
    cdef double acc, lo, hi, cap, v, base, best
    cdef signed char bu
    cdef bint feas_q

    M_arr = np.empty((Y, Q, A), dtype=np.float64)
    cdef double[:, :, ::1] M = M_arr

    with nogil:
        for y2 in range(Y):
            for q in range(Q):
                for a in range(A):
                    acc = 0.0
                    for r in range(R1):
                        acc += prows[a, r] * L_next[y2, q, trans[a, r]]
                    M[y2, q, a] = acc

        cap = ramp_down + b[0]
        kk = <int>K
        while kk >= 0 and b[kk] > cap + RAMP_TOL:
            kk -= 1
        cap_k = kk

        for y in range(Y):
            if u_floor[y] == 0:
                for q in range(Q):
                    feas_q = relax or q_val[q] <= cap + RAMP_TOL
                    for a in range(A):
                        best = INFINITY
                        bu = -1
                        if feas_q:
                            for u in range(2):
                                y2 = y_next[y, u]
                                if y2 < 0:
                                    continue
                                v = M[y2, 0, a]
                                if not terminal:
                                    v = v + y_startup[y, u] + no_load * u
                                if v < best or (v == best and <signed char>u < bu):
                                    best = v
                                    bu = <signed char>u
                        L_out[y, q, a] = best
                        if isfinite(best):
                            z_out[y, q, a] = -1
                            u_out[y, q, a] = bu
                        else:
                            z_out[y, q, a] = -9
                            u_out[y, q, a] = -1
                continue
            for q in range(Q):
                lo = q_val[q] - ramp_down
                hi = q_val[q] + ramp_up
                if headroom[y]:
                    hi = hi + b[0]
                if relax:
                    kk = <int>K
                    while kk >= 0 and b[kk] > lo + RAMP_TOL:
                        kk -= 1
                    k_lo = kk if kk > 0 else 0
                    kk = 0
                    while kk <= <int>K and b[kk] < hi - RAMP_TOL:
                        kk += 1
                    k_hi = kk if kk < <int>K else <int>K
                else:
                    kk = 0
                    while kk <= <int>K and b[kk] < lo - RAMP_TOL:
                        kk += 1
                    k_lo = kk
                    kk = <int>K
                    while kk >= 0 and b[kk] > hi + RAMP_TOL:
                        kk -= 1
                    k_hi = kk
                for a in range(A):
                    best = INFINITY
                    bk = 32000
                    bu = 127
                    for u in range(2):
                        y2 = y_next[y, u]
                        if y2 < 0:
                            continue
                        kh = k_hi
                        if u == 0 and not relax and cap_k < kh:
                            kh = cap_k
                        base = 0.0 if terminal else no_load * u
                        for k in range(k_lo, kh + 1):
                            v = c[k] + b[k] * lam[a] + base
                            if u == 1:
                                v = v + M[y2, 1 + k, a]
                            else:
                                v = v + M[y2, 0, a]
                            if v < best or (v == best and (<int>k < bk or
                                            (<int>k == bk and <signed char>u < bu))):
                                best = v
                                bk = <int>k
                                bu = <signed char>u
                    L_out[y, q, a] = best
                    if isfinite(best):
                        z_out[y, q, a] = <short>bk
                        u_out[y, q, a] = bu
                    else:
                        z_out[y, q, a] = -9
                        u_out[y, q, a] = -1
