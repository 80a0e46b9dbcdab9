"""The fourteen test statistics, as functions of a sample and its fitted mean.

Nine weighted-L_p distances between the empirical weight function and the
constant 1 (p in {1, 2, inf}, weight in {fitted pmf, empirical pmf, Laplace
kernel e^{-ax}}) and five edf/idf based competitors (KS, CV, AD, KL, ID).

The L_2 statistics are reported on the squared scale, i.e. the weighted sum
of squares without the final square root; ``stat_t2(..., root=True)`` gives
the distance itself. Bootstrap p-values and power are unaffected by the
choice since the root is strictly increasing.

All evaluation goes through :func:`poisgof.kernels.all_statistics`, so a
statistic computed here is bit-identical to the same statistic computed for
bootstrap replicates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from poisgof import kernels
from poisgof._layout import STAT_COLUMNS
from poisgof.distributions import DomainError, poisson_tail_max
from poisgof.empirical import CountSample, FittedNull, mle_lambda

__all__ = [
    "StatisticId",
    "StatValue",
    "parse_statistics",
    "statistic_matrix",
    "stat_t1",
    "stat_t2",
    "stat_tinf",
    "stat_ks",
    "stat_cv",
    "stat_ad",
    "stat_kl",
    "stat_id",
    "compute",
    "evaluate",
]

Weight = Literal["fit", "emp", "lap"]


class StatisticId(enum.Enum):
    T1_FIT = "t1-fit"
    T1_EMP = "t1-emp"
    T1_LAP = "t1-lap"
    T2_FIT = "t2-fit"
    T2_EMP = "t2-emp"
    T2_LAP = "t2-lap"
    TINF_FIT = "tinf-fit"
    TINF_EMP = "tinf-emp"
    TINF_LAP = "tinf-lap"
    KS = "ks"
    CV = "cv"
    AD = "ad"
    KL = "kl"
    ID = "id"

    @property
    def column(self) -> int:
        return STAT_COLUMNS.index(self.value)

    @property
    def is_new(self) -> bool:
        return self.value.startswith("t")

    @property
    def uses_laplace(self) -> bool:
        return self.value.endswith("-lap")

    @property
    def display(self) -> str:
        return self.value.upper() if not self.is_new else self.value

    def __str__(self):
        return self.value


# Order used for printed tables: competitors first, as in the power tables.
TABLE_ORDER = tuple(
    StatisticId(v)
    for v in ("ks", "cv", "ad", "kl", "id", "t1-fit", "t1-emp", "t1-lap", "t2-fit",
              "t2-emp", "t2-lap", "tinf-fit", "tinf-emp", "tinf-lap")
)


def parse_statistics(spec: str | list[str] | tuple) -> list[StatisticId]:
    """Parse ``"all"`` or a comma separated list of canonical names."""
    if isinstance(spec, str):
        names = [s.strip().lower() for s in spec.split(",") if s.strip()]
    else:
        names = [str(s).strip().lower() for s in spec]
    if not names:
        raise DomainError("no statistics requested")
    if "all" in names:
        return list(TABLE_ORDER)
    out = []
    for name in names:
        try:
            sid = StatisticId(name)
        except ValueError:
            valid = ", ".join(c for c in STAT_COLUMNS)
            raise DomainError(f"unknown statistic {name!r}; choose from {valid}, all") from None
        if sid not in out:
            out.append(sid)
    return out


@dataclass(frozen=True)
class StatValue:
    id: StatisticId
    value: float


def statistic_matrix(values: np.ndarray, lam=None, laplace_a: float = 1.0) -> np.ndarray:
    """All fourteen statistics for each row of ``values`` (shape ``(rows, n)``).

    ``lam`` defaults to the row means, i.e. each sample's own fitted mean.
    """
    values = np.asarray(values, dtype=np.int64)
    if values.ndim != 2 or values.shape[1] == 0:
        raise DomainError("values must be a non-empty (rows, n) array")
    if lam is None:
        lam = values.sum(axis=1) / values.shape[1]
    _check_a(laplace_a)
    return kernels.all_statistics(values, np.asarray(lam, dtype=float), float(laplace_a))


def _check_a(a: float) -> None:
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"the Laplace parameter must be positive, got {a!r}")


def _row(sample: CountSample, fit: FittedNull, a: float = 1.0) -> np.ndarray:
    if not (fit.lambda_hat >= 0 and math.isfinite(fit.lambda_hat)):
        raise DomainError(f"invalid fitted mean {fit.lambda_hat!r}")
    return statistic_matrix(sample.observations[None, :], [fit.lambda_hat], a)[0]


def _pick(weight: str, p: str) -> StatisticId:
    if weight not in ("fit", "emp", "lap"):
        raise DomainError(f"weight must be 'fit', 'emp' or 'lap', got {weight!r}")
    return StatisticId(f"{p}-{weight}")


def stat_t1(sample: CountSample, fit: FittedNull, weight: Weight = "fit", a: float = 1.0) -> float:
    """Weighted L_1 distance between the empirical weight function and 1."""
    return float(_row(sample, fit, a)[_pick(weight, "t1").column])


def stat_t2(
    sample: CountSample, fit: FittedNull, weight: Weight = "fit", a: float = 1.0, root: bool = False
) -> float:
    """Weighted L_2 statistic; the squared distance unless ``root`` is set."""
    value = float(_row(sample, fit, a)[_pick(weight, "t2").column])
    return math.sqrt(value) if root else value


def stat_tinf(sample: CountSample, fit: FittedNull, weight: Weight = "fit", a: float = 1.0) -> float:
    """Weighted L_inf distance, including the largest weight beyond the sample maximum."""
    if weight == "fit" and not fit.degenerate:
        poisson_tail_max(fit.lambda_hat, sample.m)  # validates lambda <= m + 1
    return float(_row(sample, fit, a)[_pick(weight, "tinf").column])


def stat_ks(sample: CountSample, fit: FittedNull) -> float:
    return float(_row(sample, fit)[StatisticId.KS.column])


def stat_cv(sample: CountSample, fit: FittedNull) -> float:
    return float(_row(sample, fit)[StatisticId.CV.column])


def stat_ad(sample: CountSample, fit: FittedNull) -> float:
    return float(_row(sample, fit)[StatisticId.AD.column])


def stat_kl(sample: CountSample, fit: FittedNull) -> float:
    """``sqrt(n)`` times the L_1 distance between the empirical and fitted cdfs."""
    return float(_row(sample, fit)[StatisticId.KL.column])


def stat_id(sample: CountSample, fit: FittedNull) -> float:
    """``sqrt(n)`` times the sup distance between the two integrated distribution functions."""
    return float(_row(sample, fit)[StatisticId.ID.column])


def compute(sid: StatisticId, sample: CountSample, fit: FittedNull | None = None, laplace_a: float = 1.0) -> StatValue:
    fit = mle_lambda(sample) if fit is None else fit
    return StatValue(sid, float(_row(sample, fit, laplace_a)[sid.column]))


def evaluate(sample: CountSample, ids=None, laplace_a: float = 1.0) -> dict[StatisticId, float]:
    """Every requested statistic for ``sample`` at its fitted mean."""
    ids = list(TABLE_ORDER) if ids is None else ids
    row = _row(sample, mle_lambda(sample), laplace_a)
    return {sid: float(row[sid.column]) for sid in ids}
