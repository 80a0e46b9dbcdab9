"""Empirical functionals of a count sample and the empirical weight function."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from poisgof.distributions import DomainError, poisson_log_pmf

__all__ = [
    "CountSample",
    "FittedNull",
    "DegenerateFitError",
    "mle_lambda",
    "empirical_pmf",
    "empirical_cdf",
    "empirical_idf",
    "empirical_weight",
]

_LOG_DBL_MAX = math.log(np.finfo(float).max)


class DegenerateFitError(DomainError):
    """The fitted Poisson mean is zero, so the fitted pmf is a point mass."""


class CountSample:
    """An immutable multiset of non-negative integer observations.

    Everything derived from it depends on the frequency table only, never on
    the order of the observations.
    """

    def __init__(self, observations: Iterable[int]):
        obs = np.asarray(list(observations) if not isinstance(observations, np.ndarray) else observations)
        if obs.ndim != 1 or obs.size == 0:
            raise DomainError("a sample needs at least one observation")
        if obs.dtype.kind == "f":
            if not np.all(np.isfinite(obs)) or np.any(obs != np.round(obs)):
                raise DomainError("observations must be integers")
        elif obs.dtype.kind not in "iu":
            raise DomainError("observations must be integers")
        obs = obs.astype(np.int64)
        if obs.min() < 0:
            raise DomainError("observations must be non-negative")
        obs.setflags(write=False)
        self._obs = obs

    @classmethod
    def from_frequencies(cls, freq: Mapping[int, int] | Iterable[tuple[int, int]]) -> CountSample:
        pairs = freq.items() if isinstance(freq, Mapping) else freq
        values, counts = [], []
        for value, count in pairs:
            if count < 0:
                raise DomainError(f"negative count {count} for value {value}")
            values.append(value)
            counts.append(count)
        return cls(np.repeat(np.asarray(values, dtype=np.int64), np.asarray(counts, dtype=np.int64)))

    @property
    def observations(self) -> np.ndarray:
        return self._obs

    @property
    def n(self) -> int:
        return int(self._obs.size)

    @cached_property
    def m(self) -> int:
        return int(self._obs.max())

    @cached_property
    def counts(self) -> np.ndarray:
        """``counts[x]`` is the number of observations equal to ``x``, for ``x = 0..m``."""
        c = np.bincount(self._obs, minlength=self.m + 1)
        c.setflags(write=False)
        return c

    @property
    def freq(self) -> dict[int, int]:
        return {x: int(c) for x, c in enumerate(self.counts) if c}

    def fisher_index(self) -> float:
        """Sample variance over sample mean (``nan`` when undefined)."""
        mean = self._obs.mean()
        if self.n < 2 or mean == 0:
            return float("nan")
        return float(self._obs.var(ddof=1) / mean)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, CountSample):
            return NotImplemented
        return self.counts.shape == other.counts.shape and bool(np.all(self.counts == other.counts))

    def __hash__(self):
        return hash(self.counts.tobytes())

    def __repr__(self):
        return f"CountSample(n={self.n}, freq={self.freq})"


@dataclass(frozen=True)
class FittedNull:
    lambda_hat: float

    @property
    def degenerate(self) -> bool:
        return self.lambda_hat == 0.0


def mle_lambda(sample: CountSample) -> FittedNull:
    """Maximum-likelihood Poisson mean, i.e. the sample mean."""
    if sample.n == 0:
        raise DomainError("empty sample")
    return FittedNull(int(sample.observations.sum()) / sample.n)


def empirical_pmf(sample: CountSample, x: int) -> float:
    if x < 0 or x > sample.m:
        return 0.0
    return int(sample.counts[x]) / sample.n


def empirical_cdf(sample: CountSample, x: float) -> float:
    if x < 0:
        return 0.0
    if x >= sample.m:
        return 1.0
    return int(sample.counts[: int(math.floor(x)) + 1].sum()) / sample.n


def empirical_idf(sample: CountSample, t: float) -> float:
    """Empirical integrated distribution function, the mean of ``(X_j - t)^+``."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    values = np.arange(sample.m + 1)
    excess = np.clip(values - t, 0.0, None)
    return float((excess * sample.counts).sum() / sample.n)


def empirical_weight(sample: CountSample, fit: FittedNull, x: int) -> float:
    """Ratio of the empirical pmf to the fitted Poisson pmf at ``x``.

    Zero wherever the value was not observed; saturates at the largest
    finite double rather than overflowing.
    """
    if fit.degenerate:
        raise DegenerateFitError("the empirical weight is undefined when lambda_hat = 0")
    fn = empirical_pmf(sample, x)
    if fn == 0.0:
        return 0.0
    log_ratio = math.log(fn) - poisson_log_pmf(fit.lambda_hat, x)
    return math.exp(min(log_ratio, _LOG_DBL_MAX))
