"""Poisson pmf/cdf evaluation, alternative count distributions and their samplers."""

from __future__ import annotations

import math
import re
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from poisgof import kernels

__all__ = [
    "DomainError",
    "Poisson",
    "DiscreteUniform",
    "Binomial",
    "NegativeBinomial",
    "PoissonMixture",
    "ZeroInflatedPoisson",
    "WeightedPoisson",
    "AlternativeSpec",
    "RngHandle",
    "poisson_log_pmf",
    "poisson_pmf",
    "poisson_cdf",
    "poisson_tail_max",
    "poisson_variates",
    "parse_alternative",
    "sample",
    "fisher_index",
    "pmf",
]


class DomainError(ValueError):
    """Raised when a parameter lies outside the domain of a distribution."""


def _check_rate(lam: float, name: str = "lambda") -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {lam!r}")
    return lam


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def poisson_log_pmf(lam: float, x: int) -> float:
    """Return ``log f_lam(x) = x log(lam) - lam - log(x!)``."""
    lam = _check_rate(lam)
    if x < 0:
        return -math.inf
    return x * math.log(lam) - lam - math.lgamma(x + 1.0)


def poisson_pmf(lam: float, x: int) -> float:
    return math.exp(poisson_log_pmf(lam, x))


def poisson_cdf(lam: float, x: int) -> float:
    """Poisson distribution function ``P(X <= x)``.

    The lower sum is used left of the mean and one minus the (accurately
    summed) upper tail to the right of it, so both tails keep full precision.
    """
    lam = _check_rate(lam)
    if x < 0:
        return 0.0
    if x <= lam:
        k = np.arange(x + 1, dtype=float)
        return float(min(1.0, np.exp(k * math.log(lam) - lam - _lgamma1(k)).sum()))
    return 1.0 - _poisson_sf(lam, x)


def _lgamma1(k: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(v + 1.0) for v in k])


def _poisson_sf(lam: float, x: int) -> float:
    """``P(X > x)`` for ``x > lam`` by summing the decreasing upper tail."""
    total = 0.0
    k = x + 1
    logp = poisson_log_pmf(lam, k)
    while True:
        term = math.exp(logp)
        total += term
        if term <= total * 1e-17 or logp < -745.0:
            break
        k += 1
        logp += math.log(lam) - math.log(k)
    return total


def poisson_tail_max(lam: float, m: int) -> float:
    """Largest Poisson probability beyond ``m``, i.e. ``max_{x > m} f_lam(x)``.

    The pmf is non-increasing from its smallest mode ``ceil(lam) - 1`` on, so
    whenever ``lam <= m + 1`` the maximum sits at ``m + 1``.
    """
    lam = _check_rate(lam)
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    if lam > m + 1:
        raise DomainError(f"tail maximum needs lambda <= m + 1, got lambda={lam}, m={m}")
    return math.exp(poisson_log_pmf(lam, m + 1))


def poisson_variates(lam: float, size, gen: np.random.Generator) -> np.ndarray:
    """Draw ``size`` Poisson(lam) variates.

    Inversion by sequential search below ``lam = 30``, Hormann's PTRS
    transformed rejection above. ``lam = 0`` returns zeros.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0.0:
        raise DomainError(f"lambda must be non-negative and finite, got {lam!r}")
    if lam == 0.0:
        return np.zeros(size, dtype=np.int64)
    if lam < 30.0:
        u = gen.random(size)
        return kernels.poisson_inversion(lam, u)
    return _ptrs(lam, size, gen)


def _ptrs(lam: float, size, gen: np.random.Generator) -> np.ndarray:
    out = np.empty(int(np.prod(size)), dtype=np.int64)
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    log_invalpha = math.log(1.1239 + 1.1328 / (b - 3.4))
    vr = 0.9277 - 3.6224 / (b - 2.0)
    pending = np.arange(out.size)
    while pending.size:
        u = gen.random(pending.size) - 0.5
        v = gen.random(pending.size)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + lam + 0.43)
        fast = (us >= 0.07) & (v <= vr)
        ok = k >= 0
        kk = np.where(ok, k, 0.0)
        lhs = np.log(v) + log_invalpha - np.log(a / (us * us) + b)
        rhs = -lam + kk * loglam - _gammaln1(kk)
        slow = ok & ~((us < 0.013) & (v > us)) & (lhs <= rhs)
        accept = fast | slow
        out[pending[accept]] = k[accept].astype(np.int64)
        pending = pending[~accept]
    return out.reshape(size)


def _gammaln1(k: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return gammaln(k + 1.0)


# --------------------------------------------------------------------------
# Alternatives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Poisson:
    lam: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        _check_rate(self.lam)


@dataclass(frozen=True)
class DiscreteUniform:
    """Uniform on ``{0, ..., k}``."""

    k: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"k must be a non-negative integer, got {self.k!r}")


@dataclass(frozen=True)
class Binomial:
    m: int
    p: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        _check_prob(self.p)


@dataclass(frozen=True)
class NegativeBinomial:
    """Number of failures before the ``r``-th success, success probability ``p``."""

    r: float
    p: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        _check_rate(self.r, "r")
        if not (0.0 < self.p <= 1.0):
            raise DomainError(f"p must lie in (0, 1], got {self.p!r}")


@dataclass(frozen=True)
class PoissonMixture:
    """``P(lam1)`` with probability ``p``, otherwise ``P(lam2)``."""

    p: float
    lam1: float
    lam2: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        _check_prob(self.p)
        _check_rate(self.lam1, "lambda1")
        _check_rate(self.lam2, "lambda2")


@dataclass(frozen=True)
class ZeroInflatedPoisson:
    """``P(lam)`` with probability ``p``, otherwise the value 0.

    So ``p`` is the Poisson weight and ``1 - p`` the extra mass at zero,
    giving a Fisher index of ``1 + lam (1 - p)``.
    """

    p: float
    lam: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        _check_prob(self.p)
        _check_rate(self.lam)


@dataclass(frozen=True)
class WeightedPoisson:
    """Poisson pmf re-weighted by ``(a y^2 + b y + 1) / (a (lam + lam^2) + b lam + 1)``."""

    lam: float
    a: float
    b: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        _check_rate(self.lam)
        if not (self.a >= 0.0 and self.b >= 0.0):
            raise DomainError("weighted Poisson needs a >= 0 and b >= 0")


AlternativeSpec = (
    Poisson
    | DiscreteUniform
    | Binomial
    | NegativeBinomial
    | PoissonMixture
    | ZeroInflatedPoisson
    | WeightedPoisson
)

_FAMILIES = {
    "poisson": (Poisson, (float,)),
    "p": (Poisson, (float,)),
    "du": (DiscreteUniform, (int,)),
    "bin": (Binomial, (int, float)),
    "b": (Binomial, (int, float)),
    "nb": (NegativeBinomial, (float, float)),
    "pm": (PoissonMixture, (float, float, float)),
    "zip": (ZeroInflatedPoisson, (float, float)),
    "wp": (WeightedPoisson, (float, float, float)),
}

_NAMES = {
    Poisson: "poisson",
    DiscreteUniform: "du",
    Binomial: "bin",
    NegativeBinomial: "nb",
    PoissonMixture: "pm",
    ZeroInflatedPoisson: "zip",
    WeightedPoisson: "wp",
}

_SPEC_RE = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def _number(text: str, kind: type):
    text = text.strip()
    if not text:
        raise DomainError("empty parameter")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a number: {text!r}") from exc
    if kind is int:
        if value.denominator != 1:
            raise DomainError(f"expected an integer, got {text!r}")
        return int(value)
    return float(value)


def parse_alternative(text: str) -> AlternativeSpec:
    """Parse the canonical text form, e.g. ``zip(0.8, 3)`` or ``NB(2, 2/3)``."""
    match = _SPEC_RE.match(text.lower())
    if match is None:
        raise DomainError(f"cannot parse distribution {text!r}")
    name, body = match.groups()
    if name not in _FAMILIES:
        raise DomainError(f"unknown distribution family {name!r}")
    cls, kinds = _FAMILIES[name]
    parts = body.split(",")
    if len(parts) != len(kinds):
        raise DomainError(f"{name} takes {len(kinds)} parameter(s), got {len(parts)}")
    args = [_number(part, kind) for part, kind in zip(parts, kinds)]
    label = f"{_NAMES[cls]}({','.join(part.strip() for part in parts)})"
    return cls(*args, label=label)


def format_alternative(spec: AlternativeSpec) -> str:
    if spec.label:
        return spec.label
    values = [getattr(spec, f) for f in spec.__dataclass_fields__ if f != "label"]
    return f"{_NAMES[type(spec)]}({','.join(f'{v:g}' for v in values)})"


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RngHandle:
    """A reproducible random stream identified by ``(seed, index)``.

    ``domain`` separates families of streams that share a seed (for example
    two cells of a power study). Sub-streams of one handle are obtained with
    ``generator(sub)``.
    """

    seed: int
    index: int = 0
    domain: int = 0

    def generator(self, sub: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.domain, self.index, sub))
        return np.random.Generator(np.random.PCG64(ss))

    @staticmethod
    def domain_of(*parts) -> int:
        return zlib.crc32("|".join(map(str, parts)).encode())


# --------------------------------------------------------------------------
# pmf, Fisher index, sampling
# --------------------------------------------------------------------------


def _poisson_pmf_array(lam: float, x: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return np.exp(x * math.log(lam) - lam - gammaln(x + 1.0))


def pmf(spec: AlternativeSpec, x) -> np.ndarray:
    """Evaluate the pmf of ``spec`` on the integer array ``x``."""
    from scipy.special import gammaln

    x = np.asarray(x, dtype=float)
    if isinstance(spec, Poisson):
        return _poisson_pmf_array(spec.lam, x)
    if isinstance(spec, DiscreteUniform):
        return np.where((x >= 0) & (x <= spec.k), 1.0 / (spec.k + 1), 0.0)
    if isinstance(spec, Binomial):
        from scipy.stats import binom

        return binom.pmf(x, spec.m, spec.p)
    if isinstance(spec, NegativeBinomial):
        r, p = spec.r, spec.p
        if p == 1.0:
            return (x == 0).astype(float)
        logc = gammaln(r + x) - gammaln(r) - gammaln(x + 1.0)
        return np.exp(logc + r * math.log(p) + x * math.log1p(-p))
    if isinstance(spec, PoissonMixture):
        return spec.p * _poisson_pmf_array(spec.lam1, x) + (1 - spec.p) * _poisson_pmf_array(spec.lam2, x)
    if isinstance(spec, ZeroInflatedPoisson):
        return (1 - spec.p) * (x == 0) + spec.p * _poisson_pmf_array(spec.lam, x)
    if isinstance(spec, WeightedPoisson):
        lam, a, b = spec.lam, spec.a, spec.b
        norm = a * (lam + lam * lam) + b * lam + 1.0
        return _poisson_pmf_array(lam, x) * (a * x * x + b * x + 1.0) / norm
    raise TypeError(f"not an alternative: {spec!r}")


def _weighted_poisson_table(spec: WeightedPoisson) -> np.ndarray:
    """Cumulative probabilities, truncated once the mass reaches ``1 - 1e-12``."""
    lam = spec.lam
    hi = int(math.ceil(lam + 12.0 * math.sqrt(lam) + 40.0))
    while True:
        probs = pmf(spec, np.arange(hi + 1))
        cum = np.cumsum(probs)
        if cum[-1] >= 1.0 - 1e-12:
            break
        hi *= 2
    last = int(np.searchsorted(cum, 1.0 - 1e-12))
    cum = cum[: last + 1].copy()
    cum[-1] = 1.0
    return cum


def sample(spec: AlternativeSpec, n: int, rng: RngHandle | np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent observations from ``spec`` as an int64 array."""
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    gen = rng.generator() if isinstance(rng, RngHandle) else rng
    if isinstance(spec, Poisson):
        return poisson_variates(spec.lam, n, gen)
    if isinstance(spec, DiscreteUniform):
        return gen.integers(0, spec.k + 1, size=n, dtype=np.int64)
    if isinstance(spec, Binomial):
        return gen.binomial(spec.m, spec.p, size=n).astype(np.int64)
    if isinstance(spec, NegativeBinomial):
        return gen.negative_binomial(spec.r, spec.p, size=n).astype(np.int64)
    if isinstance(spec, PoissonMixture):
        first = gen.random(n) < spec.p
        out = np.empty(n, dtype=np.int64)
        k = int(first.sum())
        out[first] = poisson_variates(spec.lam1, k, gen)
        out[~first] = poisson_variates(spec.lam2, n - k, gen)
        return out
    if isinstance(spec, ZeroInflatedPoisson):
        keep = gen.random(n) < spec.p
        out = np.zeros(n, dtype=np.int64)
        out[keep] = poisson_variates(spec.lam, int(keep.sum()), gen)
        return out
    if isinstance(spec, WeightedPoisson):
        cum = _weighted_poisson_table(spec)
        return np.searchsorted(cum, gen.random(n)).astype(np.int64)
    raise TypeError(f"not an alternative: {spec!r}")


def _poisson_raw_moments(lam: float) -> tuple[float, float, float, float]:
    l2, l3, l4 = lam**2, lam**3, lam**4
    return lam, lam + l2, l3 + 3 * l2 + lam, l4 + 6 * l3 + 7 * l2 + lam


def fisher_index(spec: AlternativeSpec) -> float:
    """Variance-to-mean ratio of ``spec`` from its closed-form moments."""
    if isinstance(spec, Poisson):
        return 1.0
    if isinstance(spec, DiscreteUniform):
        if spec.k == 0:
            raise DomainError("DU(0) is degenerate at zero; its Fisher index is undefined")
        return (spec.k + 2) / 6.0
    if isinstance(spec, Binomial):
        if spec.p == 0.0:
            raise DomainError("Bin(m, 0) is degenerate at zero")
        return 1.0 - spec.p
    if isinstance(spec, NegativeBinomial):
        if spec.p == 1.0:
            raise DomainError("NB(r, 1) is degenerate at zero")
        return 1.0 / spec.p
    if isinstance(spec, PoissonMixture):
        p, l1, l2 = spec.p, spec.lam1, spec.lam2
        mean = p * l1 + (1 - p) * l2
        second = p * (l1 + l1 * l1) + (1 - p) * (l2 + l2 * l2)
        return (second - mean * mean) / mean
    if isinstance(spec, ZeroInflatedPoisson):
        if spec.p == 0.0:
            raise DomainError("ZIP(0, lambda) is degenerate at zero")
        return 1.0 + spec.lam * (1.0 - spec.p)
    if isinstance(spec, WeightedPoisson):
        m1, m2, m3, m4 = _poisson_raw_moments(spec.lam)
        a, b = spec.a, spec.b
        norm = a * m2 + b * m1 + 1.0
        mean = (a * m3 + b * m2 + m1) / norm
        second = (a * m4 + b * m3 + m2) / norm
        return (second - mean * mean) / mean
    raise TypeError(f"not an alternative: {spec!r}")
