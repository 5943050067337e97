# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner-loop kernels.

Mirrors _fallback.py: same candidate set (segment endpoints, interior
stationary points, floor, cap) and the same smallest-w near-tie rule.
Floating-point results may differ from the numpy path in the last ulp
because summation order differs; tests compare with tolerances.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double REL_TIE = 1e-12
cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long MIX1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long MIX2 = 0x94D049BB133111EBULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _fin(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def unit_hash(key, cells):
    """Counter-based SplitMix64 stream evaluated at the given positions."""
    cdef unsigned long long k = key
    cdef cnp.uint64_t[::1] c = np.ascontiguousarray(cells, dtype=np.uint64)
    cdef Py_ssize_t n = c.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef unsigned long long z
    for i in range(n):
        z = _fin(k + (c[i] + 1ULL) * GOLDEN)
        o[i] = <double>(z >> 11) * INV53
    return out


cdef inline Py_ssize_t _pick(double[::1] ws, double[::1] fs, Py_ssize_t m) nogil:
    cdef double fmin = fs[0]
    cdef Py_ssize_t i
    for i in range(1, m):
        if fs[i] < fmin:
            fmin = fs[i]
    cdef double cutoff = fmin + REL_TIE * (fmin if fmin >= 0 else -fmin)
    for i in range(m):
        if fs[i] <= cutoff:
            return i
    return 0


def best_weight_squared(double[::1] R, double[::1] r, double w_sum,
                        double floor, double cap):
    """Minimize sum_j max(0, R_j + w*r_j)^2 / (w_sum + w)^2 over [floor, cap]."""
    cdef Py_ssize_t n = R.shape[0]
    cdef Py_ssize_t i, j, m
    cdef double A = 0.0, B = 0.0, C = 0.0
    cdef double v, b, den, wstar, w, f, acc

    if cap <= floor:
        acc = 0.0
        for i in range(n):
            v = R[i] + floor * r[i]
            if v > 0.0:
                acc += v * v
        return floor, acc / ((w_sum + floor) * (w_sum + floor))

    bp_arr = np.empty(n, dtype=np.float64)
    Rb_arr = np.empty(n, dtype=np.float64)
    rb_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] bp = bp_arr
    cdef double[::1] Rb = Rb_arr
    cdef double[::1] rb = rb_arr
    m = 0
    for i in range(n):
        v = R[i] + floor * r[i]
        if v > 0.0 or (v == 0.0 and r[i] > 0.0):
            A += r[i] * r[i]
            B += 2.0 * R[i] * r[i]
            C += R[i] * R[i]
        if r[i] != 0.0:
            b = -R[i] / r[i]
            if floor < b < cap:
                bp[m] = b
                Rb[m] = R[i]
                rb[m] = r[i]
                m += 1

    order = np.argsort(bp_arr[:m], kind="stable")
    cdef cnp.intp_t[::1] idx = np.ascontiguousarray(order, dtype=np.intp)

    cand_w_arr = np.empty(2 * m + 3, dtype=np.float64)
    cand_f_arr = np.empty(2 * m + 3, dtype=np.float64)
    cdef double[::1] cw = cand_w_arr
    cdef double[::1] cf = cand_f_arr
    cdef Py_ssize_t nc = 0
    cdef double lo = floor, hi

    for j in range(m + 1):
        hi = bp[idx[j]] if j < m else cap
        cw[nc] = lo
        cf[nc] = (A * lo * lo + B * lo + C) / ((w_sum + lo) * (w_sum + lo))
        nc += 1
        den = 2.0 * A * w_sum - B
        if den != 0.0:
            wstar = (2.0 * C - B * w_sum) / den
            if lo < wstar < hi:
                cw[nc] = wstar
                cf[nc] = (A * wstar * wstar + B * wstar + C) / (
                    (w_sum + wstar) * (w_sum + wstar))
                nc += 1
        if j < m:
            i = idx[j]
            if rb[i] > 0.0:
                A += rb[i] * rb[i]
                B += 2.0 * Rb[i] * rb[i]
                C += Rb[i] * Rb[i]
            else:
                A -= rb[i] * rb[i]
                B -= 2.0 * Rb[i] * rb[i]
                C -= Rb[i] * Rb[i]
            lo = hi
    cw[nc] = cap
    cf[nc] = (A * cap * cap + B * cap + C) / ((w_sum + cap) * (w_sum + cap))
    nc += 1

    j = _pick(cw, cf, nc)
    w = cw[j]
    acc = 0.0
    for i in range(n):
        v = R[i] + w * r[i]
        if v > 0.0:
            acc += v * v
    return w, acc / ((w_sum + w) * (w_sum + w))


def best_weight_linear_sum(double[::1] R, double[::1] r, double w_sum,
                           double floor, double cap):
    """Minimize sum_j max(0, R_j + w*r_j) / (w_sum + w) over [floor, cap]."""
    cdef Py_ssize_t n = R.shape[0]
    cdef Py_ssize_t i, j, m
    cdef double La = 0.0, Lb = 0.0
    cdef double v, b, w, acc
    cdef double lo = floor, hi

    if cap <= floor:
        acc = 0.0
        for i in range(n):
            v = R[i] + floor * r[i]
            if v > 0.0:
                acc += v
        return floor, acc / (w_sum + floor)

    bp_arr = np.empty(n, dtype=np.float64)
    Rb_arr = np.empty(n, dtype=np.float64)
    rb_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] bp = bp_arr
    cdef double[::1] Rb = Rb_arr
    cdef double[::1] rb = rb_arr
    m = 0
    for i in range(n):
        v = R[i] + floor * r[i]
        if v > 0.0 or (v == 0.0 and r[i] > 0.0):
            La += r[i]
            Lb += R[i]
        if r[i] != 0.0:
            b = -R[i] / r[i]
            if floor < b < cap:
                bp[m] = b
                Rb[m] = R[i]
                rb[m] = r[i]
                m += 1

    order = np.argsort(bp_arr[:m], kind="stable")
    cdef cnp.intp_t[::1] idx = np.ascontiguousarray(order, dtype=np.intp)

    cand_w_arr = np.empty(m + 2, dtype=np.float64)
    cand_f_arr = np.empty(m + 2, dtype=np.float64)
    cdef double[::1] cw = cand_w_arr
    cdef double[::1] cf = cand_f_arr
    cdef Py_ssize_t nc = 0

    for j in range(m + 1):
        hi = bp[idx[j]] if j < m else cap
        cw[nc] = lo
        cf[nc] = (La * lo + Lb) / (w_sum + lo)
        nc += 1
        if j < m:
            i = idx[j]
            if rb[i] > 0.0:
                La += rb[i]
                Lb += Rb[i]
            else:
                La -= rb[i]
                Lb -= Rb[i]
            lo = hi
    cw[nc] = cap
    cf[nc] = (La * cap + Lb) / (w_sum + cap)
    nc += 1

    j = _pick(cw, cf, nc)
    w = cw[j]
    acc = 0.0
    for i in range(n):
        v = R[i] + w * r[i]
        if v > 0.0:
            acc += v
    return w, acc / (w_sum + w)
