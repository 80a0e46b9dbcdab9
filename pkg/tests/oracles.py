"""Slow, literal reference implementations used as test oracles.

Nothing here touches the package's kernels: pmfs come from math.lgamma or
mpmath, tails are summed term by term out to a large cutoff, and the
integrated distribution functions are evaluated on a dense grid.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np

CUTOFF = 10_000


def mp_pmf(lam, x, dps=40):
    with mp.workdps(dps):
        lam = mp.mpf(lam)
        return mp.e ** (-lam) * lam**x / mp.factorial(x)


def mp_cdf(lam, x, dps=40):
    with mp.workdps(dps):
        return mp.fsum(mp_pmf(lam, k, dps) for k in range(x + 1))


@lru_cache(maxsize=256)
def _pmf_table(lam: float, upto: int) -> np.ndarray:
    out = np.zeros(upto + 1)
    if lam == 0.0:
        out[0] = 1.0
        return out
    logs = np.array([x * math.log(lam) - lam - math.lgamma(x + 1) for x in range(upto + 1)])
    return np.exp(logs)


def pmf_table(lam: float, upto: int = CUTOFF) -> np.ndarray:
    """Poisson pmf on 0..upto, one math.lgamma evaluation per point."""
    return _pmf_table(float(lam), upto).copy()


def frequencies(values, upto: int = CUTOFF) -> np.ndarray:
    counts = np.zeros(upto + 1)
    for v in values:
        counts[v] += 1
    return counts / len(values)


def weighted_statistics(values, a: float = 1.0) -> dict[str, float]:
    """The nine weighted distances by direct summation of the definitions."""
    values = list(values)
    n = len(values)
    lam = sum(values) / n
    m = max(values)
    f = pmf_table(lam)
    fn = frequencies(values)
    xs = np.arange(CUTOFF + 1)
    lap = np.exp(-a * xs)
    # empirical weight: f_n / f on the support of the sample, 0 elsewhere
    w = np.zeros(CUTOFF + 1)
    for x in range(m + 1):
        if fn[x] > 0:
            w[x] = fn[x] / f[x]
    dev = np.abs(w - 1.0)
    inside = xs <= m
    out = {}
    for name, g in (("fit", f), ("emp", fn), ("lap", lap)):
        tail = g[~inside].sum() if name != "emp" else 0.0
        out[f"t1-{name}"] = float((dev[inside] * g[inside]).sum() + tail)
        out[f"t2-{name}"] = float((dev[inside] ** 2 * g[inside]).sum() + tail)
        out[f"tinf-{name}"] = float(np.max(dev * g))
    return out


def cdf_pair(values):
    lam = sum(values) / len(values)
    F = np.cumsum(pmf_table(lam))
    Fn = np.cumsum(frequencies(values))
    return lam, F, Fn


def ks(values) -> float:
    _, F, Fn = cdf_pair(values)
    return float(np.max(np.abs(F - Fn)))


def cv(values) -> float:
    lam, F, Fn = cdf_pair(values)
    f = pmf_table(lam)
    k = slice(0, 101)
    return float(((F[k] - Fn[k]) ** 2 * f[k]).sum() / len(values))


def ad(values) -> float:
    lam, F, Fn = cdf_pair(values)
    f = pmf_table(lam)
    total = 0.0
    for x in range(101):
        # survival summed from the right so that it is accurate in the tail
        sf = f[x + 1:].sum()
        denom = F[x] * sf
        if denom != 0.0:
            total += (F[x] - Fn[x]) ** 2 * f[x] / denom
    return total / len(values)


def kl(values) -> float:
    _, F, Fn = cdf_pair(values)
    return math.sqrt(len(values)) * float(np.abs(Fn - F).sum())


def idf_fitted(lam: float, t: np.ndarray) -> np.ndarray:
    """Integral of the fitted survival function from t to infinity."""
    f = pmf_table(lam)
    sf = np.concatenate([np.cumsum(f[::-1])[::-1][1:], [0.0]])  # P(X > k)
    tail_from = np.concatenate([np.cumsum(sf[::-1])[::-1], [0.0]])  # sum_{j >= k} sf(j)
    k = np.floor(t).astype(int)
    return (k + 1 - t) * sf[k] + tail_from[k + 1]


def idf_empirical(values, t: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)[:, None]
    return np.clip(v - t[None, :], 0.0, None).mean(axis=0)


def id_grid(values, step: float = 1e-4) -> float:
    """Supremum of sqrt(n)|Psi_fit - Psi_n| on a dense grid over [0, m + 1]."""
    m = max(values)
    lam = sum(values) / len(values)
    ticks = np.arange(0, int(round((m + 1) / step)) + 1)
    t = ticks * step
    gap = np.abs(idf_fitted(lam, t) - idf_empirical(values, t))
    return math.sqrt(len(values)) * float(gap.max())


def all_competitors(values) -> dict[str, float]:
    return {"ks": ks(values), "cv": cv(values), "ad": ad(values), "kl": kl(values), "id": id_grid(values)}
