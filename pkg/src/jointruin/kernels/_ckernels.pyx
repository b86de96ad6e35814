# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path-scan kernels.  Same contracts as ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1

cnp.import_array()

DEF NO_RUIN = -1


def scan_joint(double[:, ::1] theta, double[:, ::1] sigma, long long[::1] counts,
               double x1, double x2, double p1, double p2, double r):
    cdef Py_ssize_t m = theta.shape[0]
    cdef Py_ssize_t i, k
    cdef double s, drift, X1, X2
    cdef long long t1, t2, tmin, tmax
    out_arr = np.empty((m, 4), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            t1 = 0 if x1 < 0 else NO_RUIN
            t2 = 0 if x2 < 0 else NO_RUIN
            tmin = 0 if (x1 < 0 or x2 < 0) else NO_RUIN
            tmax = 0 if (x1 < 0 and x2 < 0) else NO_RUIN
            s = 0.0
            for k in range(counts[i]):
                if tmax != NO_RUIN:
                    break
                s = s + exp(-r * theta[i, k]) * sigma[i, k]
                drift = -expm1(-r * theta[i, k])
                X1 = x1 + p1 * drift - s
                X2 = x2 + p2 * drift - s
                if X1 < 0 and t1 == NO_RUIN:
                    t1 = k + 1
                if X2 < 0 and t2 == NO_RUIN:
                    t2 = k + 1
                if (X1 < 0 or X2 < 0) and tmin == NO_RUIN:
                    tmin = k + 1
                if X1 < 0 and X2 < 0:
                    tmax = k + 1
            out[i, 0] = t1
            out[i, 1] = t2
            out[i, 2] = tmin
            out[i, 3] = tmax
    return out_arr


def scan_joint_compounded(double[:, ::1] theta, double[:, ::1] sigma, long long[::1] counts,
                          double u1, double u2, double c1, double c2,
                          double d1, double d2, double r):
    cdef Py_ssize_t m = theta.shape[0]
    cdef Py_ssize_t i, k
    cdef double U1, U2, prev, dt, g, e
    cdef long long t1, t2, tmin, tmax
    out_arr = np.empty((m, 4), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            t1 = 0 if u1 < 0 else NO_RUIN
            t2 = 0 if u2 < 0 else NO_RUIN
            tmin = 0 if (u1 < 0 or u2 < 0) else NO_RUIN
            tmax = 0 if (u1 < 0 and u2 < 0) else NO_RUIN
            U1 = u1
            U2 = u2
            prev = 0.0
            for k in range(counts[i]):
                if tmax != NO_RUIN:
                    break
                dt = theta[i, k] - prev
                g = exp(r * dt)
                e = expm1(r * dt)
                U1 = g * U1 + (c1 / r) * e - d1 * sigma[i, k]
                U2 = g * U2 + (c2 / r) * e - d2 * sigma[i, k]
                prev = theta[i, k]
                if U1 < 0 and t1 == NO_RUIN:
                    t1 = k + 1
                if U2 < 0 and t2 == NO_RUIN:
                    t2 = k + 1
                if (U1 < 0 or U2 < 0) and tmin == NO_RUIN:
                    tmin = k + 1
                if U1 < 0 and U2 < 0:
                    tmax = k + 1
            out[i, 0] = t1
            out[i, 1] = t2
            out[i, 2] = tmin
            out[i, 3] = tmax
    return out_arr


def first_passage_levels(double[:, ::1] theta, double[:, ::1] sigma, long long[::1] counts,
                         levels, double p, double r):
    lv = np.ascontiguousarray(levels, dtype=np.float64)
    order_arr = np.argsort(lv, kind="stable").astype(np.int64)
    cdef double[::1] lev = lv
    cdef long long[::1] order = order_arr
    cdef Py_ssize_t m = theta.shape[0]
    cdef Py_ssize_t L = lv.shape[0]
    cdef Py_ssize_t i, k, j, start
    cdef double s, excess, runmax
    out_arr = np.empty((m, L), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            # levels below zero are ruined at time zero
            start = 0
            while start < L and lev[order[start]] < 0:
                out[i, order[start]] = 0
                start += 1
            j = start
            s = 0.0
            runmax = -1.0
            for k in range(counts[i]):
                if j >= L:
                    break
                s = s + exp(-r * theta[i, k]) * sigma[i, k]
                excess = s + p * expm1(-r * theta[i, k])
                if excess > runmax:
                    runmax = excess
                    while j < L and lev[order[j]] < runmax:
                        out[i, order[j]] = k + 1
                        j += 1
            while j < L:
                out[i, order[j]] = NO_RUIN
                j += 1
    return out_arr
