"""Pure numpy implementations of the hot kernels.

Every row is evaluated on its own grid ``0 .. G_row - 1`` and all reductions
are sequential (``cumsum``), so a row's result never depends on which other
rows share its batch.
"""

import math

import numpy as np
from scipy.special import gammaln

from poisgof._layout import CV_AD_LAST, LOG_DBL_MAX, N_STATS, grid_size, inversion_limit

_CHUNK = 2048
_DBL_MAX = np.finfo(float).max


def poisson_inversion(lam, u):
    u = np.asarray(u, dtype=float)
    last = inversion_limit(lam)
    steps = np.empty(last + 1)
    steps[0] = math.exp(-lam)
    steps[1:] = lam / np.arange(1, last + 1, dtype=float)
    cdf = np.cumsum(np.cumprod(steps))
    out = np.searchsorted(cdf, u.ravel(), side="left")
    np.minimum(out, last, out=out)
    return out.astype(np.int64).reshape(u.shape)


def _rowsum(a):
    return np.cumsum(a, axis=1)[:, -1]


def _suffix(a):
    """``out[:, x] = sum(a[:, x:])`` accumulated right to left."""
    return np.cumsum(a[:, ::-1], axis=1)[:, ::-1]


def all_statistics(values, lam, a=1.0):
    values = np.asarray(values, dtype=np.int64)
    lam = np.asarray(lam, dtype=float)
    out = np.empty((values.shape[0], N_STATS))
    for start in range(0, values.shape[0], _CHUNK):
        stop = start + _CHUNK
        out[start:stop] = _block(values[start:stop], lam[start:stop], float(a))
    return out


def _block(values, lam, a):
    rows, n = values.shape
    m = values.max(axis=1)
    g_row = np.array([grid_size(l, mm) for l, mm in zip(lam, m)])
    g = int(g_row.max())
    x = np.arange(g, dtype=float)
    idx = np.arange(rows)[:, None]
    inside = x[None, :] < g_row[:, None]
    upto_m = x[None, :] <= m[:, None]

    with np.errstate(divide="ignore", invalid="ignore"):
        logf = x * np.log(lam)[:, None] - lam[:, None] - gammaln(x + 1.0)
    zero = lam == 0.0
    if zero.any():
        logf[zero] = np.where(x == 0, 0.0, -np.inf)
    f = np.where(inside, np.exp(logf), 0.0)

    suffix_f = _suffix(f)
    sf = np.zeros_like(f)
    sf[:, :-1] = suffix_f[:, 1:]
    cdf = np.cumsum(f, axis=1)

    counts = np.bincount((values + idx * g).ravel(), minlength=rows * g).reshape(rows, g)
    tailcount = np.zeros((rows, g))
    tailcount[:, :-1] = _suffix(counts)[:, 1:]
    fn = counts / n
    sn = tailcount / n

    seen = counts > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lr = np.where(seen, np.log(np.where(seen, fn, 1.0)) - logf, 0.0)
        lr = np.minimum(lr, LOG_DBL_MAX)
        d = np.where(seen, np.abs(np.expm1(lr)), 1.0)
        d = np.where(upto_m, d, 0.0)
        lap = np.exp(-a * x)[None, :]
        diff = np.where(upto_m, np.abs(fn - f), 0.0)
        d_fn = d * fn
        d_lap = d * lap
        terms = [
            diff,
            d_fn,
            d_lap,
            d * diff,
            d * d_fn,
            d * d_lap,
        ]
        sums = [_rowsum(t) for t in terms]

    mi = m.astype(np.int64)
    fit_tail = sf[np.arange(rows), mi]
    lap_tail = np.exp(-a * (m + 1.0)) / -math.expm1(-a)
    res = np.empty((rows, N_STATS))
    res[:, 0] = sums[0] + fit_tail
    res[:, 1] = sums[1]
    res[:, 2] = sums[2] + lap_tail
    res[:, 3] = sums[3] + fit_tail
    res[:, 4] = sums[4]
    res[:, 5] = sums[5] + lap_tail
    res[:, 6] = np.maximum(diff.max(axis=1), f[np.arange(rows), mi + 1])
    res[:, 7] = d_fn.max(axis=1)
    res[:, 8] = np.maximum(d_lap.max(axis=1), np.exp(-a * (m + 1.0)))

    gap = sf - sn
    res[:, 9] = np.where(upto_m, np.abs(gap), 0.0).max(axis=1)
    head = x[None, :] <= CV_AD_LAST
    sq = gap * gap * f
    res[:, 10] = _rowsum(np.where(head, sq, 0.0)) / n
    denom = cdf * sf
    ok = head & (denom != 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        res[:, 11] = _rowsum(np.where(ok, sq / np.where(ok, denom, 1.0), 0.0)) / n

    psi_fit = _suffix(sf)
    psi_emp = _suffix(sn)
    below_m = x[None, :] < m[:, None]
    root_n = math.sqrt(n)
    res[:, 12] = root_n * (
        _rowsum(np.where(below_m, np.abs(gap), 0.0)) + psi_fit[np.arange(rows), mi]
    )
    upto_m1 = x[None, :] <= (m + 1)[:, None]
    res[:, 13] = root_n * np.where(upto_m1, np.abs(psi_fit - psi_emp), 0.0).max(axis=1)

    np.minimum(res, _DBL_MAX, out=res)
    return res
