# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot kernels: Poisson inversion sampling and the batch statistic matrix."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, lgamma, log, sqrt, INFINITY

from poisgof._layout import CV_AD_LAST, LOG_DBL_MAX, N_STATS, grid_size, inversion_limit

cnp.import_array()

cdef double DBL_MAX = 1.7976931348623157e308


def poisson_inversion(double lam, u):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(uu.shape[0], dtype=np.int64)
    cdef Py_ssize_t i
    cdef long x, last = inversion_limit(lam)
    cdef double p, s, p0 = exp(-lam), ui
    for i in range(uu.shape[0]):
        ui = uu[i]
        x = 0
        p = p0
        s = p
        while ui > s and x < last:
            x += 1
            p = p * (lam / <double>x)
            s += p
        out[i] = x
    return out.reshape(np.shape(u))


def all_statistics(values, lam, double a=1.0):
    cdef const cnp.int64_t[:, ::1] vals = np.ascontiguousarray(values, dtype=np.int64)
    cdef const double[::1] lams = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t rows = vals.shape[0], n = vals.shape[1]
    result = np.empty((rows, N_STATS), dtype=np.float64)
    cdef double[:, ::1] res = result
    cdef cnp.int64_t[::1] mx = np.asarray(values).max(axis=1).astype(np.int64) if rows else np.empty(0, np.int64)
    cdef Py_ssize_t gmax = 1, r, g
    for r in range(rows):
        g = grid_size(lams[r], mx[r])
        if g > gmax:
            gmax = g
    cdef double[::1] logf = np.empty(gmax)
    cdef double[::1] f = np.empty(gmax)
    cdef double[::1] sf = np.empty(gmax)
    cdef double[::1] cnt = np.empty(gmax)
    cdef double[::1] sn = np.empty(gmax)
    cdef double lap_base = -expm1(-a)
    cdef double log_dbl_max = LOG_DBL_MAX
    cdef int cv_last = CV_AD_LAST
    for r in range(rows):
        g = grid_size(lams[r], mx[r])
        _row(&vals[r, 0], n, mx[r], lams[r], a, lap_base, log_dbl_max, cv_last, g,
             &logf[0], &f[0], &sf[0], &cnt[0], &sn[0], &res[r, 0])
    return result


cdef inline double _clamp(double v) nogil:
    return v if v < DBL_MAX else DBL_MAX


cdef void _row(const cnp.int64_t* v, Py_ssize_t n, Py_ssize_t m, double lam, double a,
               double lap_base, double log_dbl_max, int cv_last, Py_ssize_t g,
               double* logf, double* f, double* sf, double* cnt, double* sn,
               double* out) nogil:
    cdef Py_ssize_t j, x
    cdef double loglam, acc, fn, lr, d, diff, lapw, d_fn, d_lap, gap, sq, denom
    cdef double t1f = 0, t1e = 0, t1l = 0, t2f = 0, t2e = 0, t2l = 0
    cdef double mf = 0, me = 0, ml = 0, ks = 0, cv = 0, ad = 0, kl = 0, idv = 0
    cdef double cdf = 0, psi_f, psi_e, lap_tail, nn = <double>n

    if lam == 0.0:
        for x in range(g):
            logf[x] = 0.0 if x == 0 else -INFINITY
    else:
        loglam = log(lam)
        for x in range(g):
            logf[x] = x * loglam - lam - lgamma(x + 1.0)
    for x in range(g):
        f[x] = exp(logf[x])
        cnt[x] = 0.0
    for j in range(n):
        cnt[v[j]] += 1.0

    # upper tails, accumulated right to left
    sf[g - 1] = 0.0
    sn[g - 1] = 0.0
    for x in range(g - 2, -1, -1):
        sf[x] = sf[x + 1] + f[x + 1]
        sn[x] = sn[x + 1] + cnt[x + 1]
    for x in range(g):
        sn[x] = sn[x] / nn

    for x in range(m + 1):
        fn = cnt[x] / nn
        if cnt[x] > 0:
            lr = log(fn) - logf[x]
            if lr > log_dbl_max:
                lr = log_dbl_max
            d = fabs(expm1(lr))
        else:
            d = 1.0
        diff = fabs(fn - f[x])
        lapw = exp(-a * x)
        d_fn = d * fn
        d_lap = d * lapw
        t1f += diff
        t1e += d_fn
        t1l += d_lap
        t2f += d * diff
        t2e += d * d_fn
        t2l += d * d_lap
        if diff > mf:
            mf = diff
        if d_fn > me:
            me = d_fn
        if d_lap > ml:
            ml = d_lap
        gap = fabs(sf[x] - sn[x])
        if gap > ks:
            ks = gap
        if x < m:
            kl += gap

    for x in range(cv_last + 1):
        cdf += f[x]
        gap = sf[x] - sn[x]
        sq = gap * gap * f[x]
        cv += sq
        denom = cdf * sf[x]
        if denom != 0.0:
            ad += sq / denom

    psi_f = 0.0
    psi_e = 0.0
    for x in range(g - 1, -1, -1):
        psi_f += sf[x]
        psi_e += sn[x]
        if x == m:
            kl += psi_f
        if x <= m + 1:
            d = fabs(psi_f - psi_e)
            if d > idv:
                idv = d

    lap_tail = exp(-a * (m + 1.0)) / lap_base
    out[0] = _clamp(t1f + sf[m])
    out[1] = _clamp(t1e)
    out[2] = _clamp(t1l + lap_tail)
    out[3] = _clamp(t2f + sf[m])
    out[4] = _clamp(t2e)
    out[5] = _clamp(t2l + lap_tail)
    out[6] = _clamp(mf if mf > f[m + 1] else f[m + 1])
    out[7] = _clamp(me)
    out[8] = _clamp(ml if ml > exp(-a * (m + 1.0)) else exp(-a * (m + 1.0)))
    out[9] = ks
    out[10] = cv / nn
    out[11] = ad / nn
    out[12] = _clamp(sqrt(nn) * kl)
    out[13] = _clamp(sqrt(nn) * idv)
