"""Parametric-bootstrap p-values and the warp-speed Monte Carlo power engine."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from poisgof.distributions import (
    AlternativeSpec,
    DomainError,
    RngHandle,
    fisher_index,
    format_alternative,
    parse_alternative,
    poisson_variates,
    sample,
)
from poisgof.empirical import CountSample, mle_lambda
from poisgof.statistics import StatisticId, parse_statistics, statistic_matrix

__all__ = [
    "BootstrapOutcome",
    "bootstrap_pvalue",
    "bootstrap_pvalues",
    "critical_value",
    "PowerStudyConfig",
    "PowerTable",
    "warp_speed_power",
    "simulate_cell",
    "rejection_rate",
    "ConfigError",
]

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.01, 0.05, 0.10)
BLOCK = 500  # replications per work item; fixed so results do not depend on workers
_DRAW_BUDGET = 1 << 20  # variates generated per bootstrap block


class ConfigError(ValueError):
    """A power study config has unknown, missing or malformed keys."""


@dataclass
class BootstrapOutcome:
    id: StatisticId
    statistic: float
    replicates: np.ndarray
    p_value: float
    reject_at: dict[float, bool]
    degenerate: bool = False

    @property
    def B(self) -> int:
        return int(self.replicates.size)


def _p_value(stat: float, replicates: np.ndarray) -> float:
    # Strictly larger replicates only: discrete statistics tie with the
    # observed value on a large share of resamples.
    exceed = int(np.count_nonzero(replicates > stat))
    return (1 + exceed) / (replicates.size + 1)


def bootstrap_pvalues(
    data: CountSample,
    ids=None,
    B: int = 10_000,
    rng: RngHandle | None = None,
    alphas=DEFAULT_ALPHAS,
    laplace_a: float = 1.0,
) -> dict[StatisticId, BootstrapOutcome]:
    """Bootstrap p-values for several statistics sharing one set of resamples.

    Each resample is drawn from the Poisson law at the observed mean, refitted
    at its own mean, and every statistic is evaluated on it. The p-value is
    ``(1 + #{S* > S}) / (B + 1)``.
    """
    ids = parse_statistics("all") if ids is None else list(ids)
    if B < 100:
        raise DomainError(f"B must be at least 100, got {B}")
    rng = RngHandle(0) if rng is None else rng
    fit = mle_lambda(data)
    observed = statistic_matrix(data.observations[None, :], [fit.lambda_hat], laplace_a)[0]
    if fit.degenerate:
        # every resample from P(0) is all-zero and reproduces the statistic
        return {
            sid: BootstrapOutcome(sid, float(observed[sid.column]), np.empty(0), 1.0,
                                  {a: False for a in alphas}, degenerate=True)
            for sid in ids
        }

    gen = rng.generator()
    n = data.n
    per_block = max(1, _DRAW_BUDGET // n)
    blocks = []
    for start in range(0, B, per_block):
        rows = min(per_block, B - start)
        draws = poisson_variates(fit.lambda_hat, (rows, n), gen)
        blocks.append(statistic_matrix(draws, None, laplace_a))
    reps = np.concatenate(blocks)

    out = {}
    for sid in ids:
        col = sid.column
        stat = float(observed[col])
        replicates = np.ascontiguousarray(reps[:, col])
        p = _p_value(stat, replicates)
        out[sid] = BootstrapOutcome(sid, stat, replicates, p, {a: p <= a for a in alphas})
    return out


def bootstrap_pvalue(
    data: CountSample,
    sid: StatisticId,
    B: int = 10_000,
    rng: RngHandle | None = None,
    alphas=DEFAULT_ALPHAS,
    laplace_a: float = 1.0,
) -> BootstrapOutcome:
    return bootstrap_pvalues(data, [sid], B, rng, alphas, laplace_a)[sid]


def _order_index(M: int, alpha: float) -> int:
    """1-based index ``floor(M (1 - alpha))`` clamped to ``[1, M]``, in exact decimal arithmetic."""
    k = math.floor(M * (1 - Fraction(str(alpha))))
    return min(max(k, 1), M)


def critical_value(replicates, alpha: float) -> float:
    """The ``floor(M (1 - alpha))``-th smallest of the bootstrap replicates."""
    values = np.sort(np.asarray(replicates, dtype=float))
    if values.size == 0:
        raise DomainError("no replicates")
    return float(values[_order_index(values.size, alpha) - 1])


def rejection_rate(stats, boot, alpha: float) -> float:
    """Percentage of ``stats`` strictly above the warp-speed critical value of ``boot``."""
    crit = critical_value(boot, alpha)
    return 100.0 * np.count_nonzero(np.asarray(stats) > crit) / len(stats)


# --------------------------------------------------------------------------
# Power studies
# --------------------------------------------------------------------------


@dataclass
class PowerStudyConfig:
    alternatives: list[AlternativeSpec]
    sample_sizes: list[int]
    statistics: list[StatisticId] = field(default_factory=lambda: parse_statistics("all"))
    replications: int = 50_000
    alpha: float = 0.05
    seed: int = 0
    laplace_a: float = 1.0

    def __post_init__(self):
        problems = []
        if not self.alternatives:
            problems.append("alternatives: empty")
        if not self.sample_sizes or any(int(n) != n or n < 1 for n in self.sample_sizes):
            problems.append("sample_sizes: need positive integers")
        if not self.statistics:
            problems.append("statistics: empty")
        if int(self.replications) != self.replications or self.replications < 100:
            problems.append("replications: need an integer >= 100")
        if not (0.0 < self.alpha < 1.0):
            problems.append("alpha: need 0 < alpha < 1")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            problems.append("seed: need an unsigned 64-bit integer")
        if problems:
            raise DomainError("invalid power study config: " + "; ".join(problems))

    @classmethod
    def from_mapping(cls, raw: dict) -> PowerStudyConfig:
        known = {"alternatives", "sample_sizes", "statistics", "replications", "alpha", "seed", "laplace_a"}
        unknown = sorted(set(raw) - known)
        missing = sorted({"alternatives", "sample_sizes"} - set(raw))
        if unknown or missing:
            parts = []
            if unknown:
                parts.append("unknown keys: " + ", ".join(unknown))
            if missing:
                parts.append("missing keys: " + ", ".join(missing))
            raise ConfigError("invalid power study config: " + "; ".join(parts))
        alts = raw["alternatives"]
        if isinstance(alts, str):
            alts = [alts]
        sizes = raw["sample_sizes"]
        if isinstance(sizes, int):
            sizes = [sizes]
        if not isinstance(alts, list) or not isinstance(sizes, list):
            raise ConfigError("invalid power study config: alternatives and sample_sizes must be lists")
        kwargs = dict(
            alternatives=[parse_alternative(str(a)) for a in alts],
            sample_sizes=[int(n) for n in sizes],
        )
        if "statistics" in raw:
            kwargs["statistics"] = parse_statistics(raw["statistics"])
        for key, conv in (("replications", int), ("alpha", float), ("seed", int), ("laplace_a", float)):
            if key in raw:
                kwargs[key] = conv(raw[key])
        return cls(**kwargs)


def _cell_domain(spec: AlternativeSpec, n: int) -> int:
    return RngHandle.domain_of(format_alternative(spec), n)


def simulate_cell(spec: AlternativeSpec, n: int, seed: int, start: int, stop: int, laplace_a: float = 1.0):
    """Replications ``start..stop-1`` of one (alternative, n) cell.

    Returns the statistic matrices of the data samples and of their single
    bootstrap samples, each of shape ``(stop - start, 14)``. Replication
    ``i`` draws its data from sub-stream 0 and its bootstrap sample from
    sub-stream 1 of ``RngHandle(seed, i, cell)``.
    """
    domain = _cell_domain(spec, n)
    count = stop - start
    data = np.empty((count, n), dtype=np.int64)
    boot = np.empty((count, n), dtype=np.int64)
    for row, i in enumerate(range(start, stop)):
        handle = RngHandle(seed, i, domain)
        x = sample(spec, n, handle.generator(0))
        data[row] = x
        boot[row] = poisson_variates(int(x.sum()) / n, n, handle.generator(1))
    return statistic_matrix(data, None, laplace_a), statistic_matrix(boot, None, laplace_a)


def _run_block(job):
    return simulate_cell(*job)


def _resolve_workers(workers: int) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def warp_speed_power(config: PowerStudyConfig, workers: int = 1) -> PowerTable:
    """Empirical rejection percentages by the warp-speed bootstrap.

    Every replication draws one sample from the alternative and one bootstrap
    sample from the Poisson law at that sample's mean; the pooled bootstrap
    statistics give the critical value for all replications of the cell.
    """
    M = config.replications
    cells = [(spec, n) for spec in config.alternatives for n in config.sample_sizes]
    jobs = [
        (spec, n, config.seed, start, min(start + BLOCK, M), config.laplace_a)
        for spec, n in cells
        for start in range(0, M, BLOCK)
    ]
    workers = _resolve_workers(workers)
    if workers == 1:
        results = map(_run_block, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_block, jobs, chunksize=1)

    power = np.empty((len(config.alternatives), len(config.sample_sizes), len(config.statistics)))
    per_cell = -(-M // BLOCK)
    try:
        results = iter(results)
        for c, (spec, n) in enumerate(cells):
            parts = [next(results) for _ in range(per_cell)]
            stats = np.concatenate([p[0] for p in parts])
            boot = np.concatenate([p[1] for p in parts])
            a, j = divmod(c, len(config.sample_sizes))
            for s, sid in enumerate(config.statistics):
                power[a, j, s] = rejection_rate(stats[:, sid.column], boot[:, sid.column], config.alpha)
            log.info("cell %s n=%d done", format_alternative(spec), n)
    finally:
        if workers != 1:
            pool.shutdown()

    return PowerTable(
        alternatives=[format_alternative(s) for s in config.alternatives],
        fisher_index=[_safe_fi(s) for s in config.alternatives],
        sample_sizes=list(config.sample_sizes),
        statistics=list(config.statistics),
        power=power,
        replications=M,
        alpha=config.alpha,
        seed=config.seed,
    )


def _safe_fi(spec) -> float:
    try:
        return fisher_index(spec)
    except DomainError:
        return float("nan")


CSV_COLUMNS = ("alternative", "fisher_index", "n", "statistic", "power_pct", "M", "alpha", "seed")


@dataclass
class PowerTable:
    alternatives: list[str]
    fisher_index: list[float]
    sample_sizes: list[int]
    statistics: list[StatisticId]
    power: np.ndarray  # (alternative, n, statistic), percent
    replications: int
    alpha: float
    seed: int

    def cell(self, alternative: str, n: int, sid: StatisticId | str) -> float:
        sid = StatisticId(sid) if isinstance(sid, str) else sid
        a = self.alternatives.index(alternative)
        return float(self.power[a, self.sample_sizes.index(n), self.statistics.index(sid)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for a, alt in enumerate(self.alternatives):
            for j, n in enumerate(self.sample_sizes):
                for s, sid in enumerate(self.statistics):
                    writer.writerow(
                        [alt, repr(float(self.fisher_index[a])), n, sid.value,
                         repr(float(self.power[a, j, s])), self.replications,
                         repr(float(self.alpha)), self.seed]
                    )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> PowerTable:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise DomainError("empty power table")
        alts, sizes, stats, fis = [], [], [], {}
        for r in rows:
            if r["alternative"] not in alts:
                alts.append(r["alternative"])
                fis[r["alternative"]] = float(r["fisher_index"])
            if int(r["n"]) not in sizes:
                sizes.append(int(r["n"]))
            sid = StatisticId(r["statistic"])
            if sid not in stats:
                stats.append(sid)
        power = np.full((len(alts), len(sizes), len(stats)), np.nan)
        for r in rows:
            power[alts.index(r["alternative"]), sizes.index(int(r["n"])),
                  stats.index(StatisticId(r["statistic"]))] = float(r["power_pct"])
        first = rows[0]
        return cls(alts, [fis[a] for a in alts], sizes, stats, power,
                   int(first["M"]), float(first["alpha"]), int(first["seed"]))

    def equals(self, other: PowerTable) -> bool:
        return (
            self.alternatives == other.alternatives
            and self.sample_sizes == other.sample_sizes
            and self.statistics == other.statistics
            and np.array_equal(self.power, other.power)
            and np.array_equal(np.asarray(self.fisher_index), np.asarray(other.fisher_index), equal_nan=True)
            and (self.replications, self.alpha, self.seed) == (other.replications, other.alpha, other.seed)
        )

    def to_text(self) -> str:
        """Aligned table, rounded to whole percent; ``*`` marks each row maximum."""
        heads = ["Distribution", "n", "FI"] + [sid.display for sid in self.statistics]
        lines = []
        for a, alt in enumerate(self.alternatives):
            for j, n in enumerate(self.sample_sizes):
                rounded = [int(round(v)) for v in self.power[a, j]]
                top = max(rounded)
                cells = [f"{v}*" if v == top else f"{v}" for v in rounded]
                fi = self.fisher_index[a]
                lines.append([alt, str(n), "nan" if math.isnan(fi) else f"{fi:.2f}"] + cells)
        widths = [max(len(h), *(len(r[i]) for r in lines)) for i, h in enumerate(heads)]
        out = [
            f"# M={self.replications} alpha={self.alpha} seed={self.seed}",
            "  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(heads, widths))),
        ]
        for r in lines:
            out.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
        return "\n".join(out) + "\n"
