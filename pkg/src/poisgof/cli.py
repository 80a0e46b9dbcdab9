"""Command line interface.

    poisgof test  --data sparrow --tests all --reps 100000 --alpha 0.10 --seed 7
    poisgof stat  --data horsekicks.csv --tests t2-emp,tinf-fit
    poisgof power --preset paper-n50 --out n50.csv --workers 0

Exit codes: 0 success, 1 usage or parse error, 2 numeric/domain error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from poisgof import kernels
from poisgof.bootstrap import ConfigError, PowerStudyConfig, bootstrap_pvalues, warp_speed_power
from poisgof.distributions import DomainError, RngHandle
from poisgof.empirical import CountSample, mle_lambda
from poisgof.statistics import StatisticId, parse_statistics, statistic_matrix

log = logging.getLogger("poisgof")

BUNDLED = ("sparrow", "horsekicks")
PRESETS = ("paper-n30", "paper-n50", "paper-n100", "desk")


class DatasetError(ValueError):
    pass


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# Input
# --------------------------------------------------------------------------


def _bundled_path(name: str):
    return resources.files("poisgof").joinpath("data", name)


def resolve_data(path: str):
    p = Path(path)
    if p.exists():
        return p
    stem = p.name.removesuffix(".csv")
    if stem in BUNDLED:
        return _bundled_path(f"{stem}.csv")
    raise DatasetError(f"{path}: no such file (bundled datasets: {', '.join(BUNDLED)})")


def parse_dataset(text: str, source: str = "<data>") -> CountSample:
    """Read raw (one integer per line) or frequency (``value,count``) format."""
    raw, freq = [], {}
    kind = None
    header_allowed = True
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if header_allowed and len(fields) == 2 and [f.lower() for f in fields] == ["value", "count"]:
            header_allowed = False
            kind = "freq"
            continue
        header_allowed = False
        this = "freq" if len(fields) == 2 else "raw" if len(fields) == 1 else None
        if this is None:
            raise DatasetError(f"{source}:{lineno}: expected 'value' or 'value,count', got {line!r}")
        if kind is not None and this != kind:
            raise DatasetError(f"{source}:{lineno}: mixes raw and frequency formats")
        kind = this
        try:
            nums = [int(f) for f in fields]
        except ValueError:
            raise DatasetError(f"{source}:{lineno}: not an integer: {line!r}") from None
        if any(v < 0 for v in nums):
            raise DatasetError(f"{source}:{lineno}: negative value in {line!r}")
        if kind == "raw":
            raw.append(nums[0])
        else:
            value, count = nums
            if value in freq:
                raise DatasetError(f"{source}:{lineno}: duplicate value {value}")
            freq[value] = count
    if kind == "freq":
        if sum(freq.values()) == 0:
            raise DatasetError(f"{source}: dataset has no observations")
        return CountSample.from_frequencies(sorted(freq.items()))
    if not raw:
        raise DatasetError(f"{source}: dataset has no observations")
    return CountSample(raw)


def load_dataset(path: str) -> CountSample:
    p = resolve_data(path)
    return parse_dataset(p.read_text(), str(path))


def load_config(path: str | None, preset: str | None) -> PowerStudyConfig:
    if (path is None) == (preset is None):
        raise UsageError("give exactly one of --config or --preset")
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        text = _bundled_path("presets").joinpath(f"{preset}.yaml").read_text()
    else:
        text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of keys to values")
    try:
        return PowerStudyConfig.from_mapping(raw)
    except (TypeError,) as exc:
        raise ConfigError(f"invalid power study config: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, (DomainError, ConfigError)):
            raise
        raise ConfigError(f"invalid power study config: {exc}") from None


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class ReportRow:
    id: StatisticId
    statistic: float
    p_value: float | None = None
    reject: bool | None = None


@dataclass
class RunReport:
    source: str
    n: int
    m: int
    lambda_hat: float
    fisher_index: float
    rows: list[ReportRow]
    alpha: float | None = None
    reps: int | None = None
    seed: int | None = None
    degenerate: bool = False

    def summary(self) -> dict:
        out = {
            "data": self.source,
            "n": self.n,
            "m": self.m,
            "lambda_hat": self.lambda_hat,
            "fisher_index": None if math.isnan(self.fisher_index) else self.fisher_index,
            "degenerate": self.degenerate,
        }
        if self.alpha is not None:
            out.update(alpha=self.alpha, reps=self.reps, seed=self.seed)
        return out

    def render(self, fmt: str) -> str:
        with_p = self.alpha is not None
        if fmt == "jsonl":
            lines = [json.dumps({"type": "summary", **self.summary()})]
            for r in self.rows:
                rec = {"type": "statistic", "test": r.id.value, "statistic": r.statistic}
                if with_p:
                    rec.update(p_value=r.p_value, reject=r.reject)
                lines.append(json.dumps(rec))
            return "\n".join(lines) + "\n"
        if fmt == "csv":
            head = "test,statistic" + (",p_value,reject" if with_p else "")
            lines = [head]
            for r in self.rows:
                line = f"{r.id.value},{r.statistic!r}"
                if with_p:
                    line += f",{r.p_value!r},{str(r.reject).lower()}"
                lines.append(line)
            return "\n".join(lines) + "\n"
        fi = "n/a" if math.isnan(self.fisher_index) else f"{self.fisher_index:.4f}"
        lines = [
            f"data: {self.source}",
            f"n = {self.n}   max = {self.m}   lambda_hat = {self.lambda_hat:.6g}   Fisher index = {fi}",
        ]
        if self.degenerate:
            lines.append("all observations are zero: fitted Poisson is degenerate, every p-value is 1")
        if with_p:
            lines.append(f"parametric bootstrap: B = {self.reps}, seed = {self.seed}, alpha = {self.alpha}")
            lines.append("")
            lines.append(f"{'test':<10} {'statistic':>12} {'p-value':>9}  decision")
            for r in self.rows:
                decision = "reject" if r.reject else "do not reject"
                lines.append(f"{r.id.value:<10} {r.statistic:>12.4f} {r.p_value:>9.4f}  {decision}")
        else:
            lines.append("")
            lines.append(f"{'test':<10} {'statistic':>24}")
            for r in self.rows:
                lines.append(f"{r.id.value:<10} {r.statistic!r:>24}")
        return "\n".join(lines) + "\n"


def _summary(data: CountSample, source: str) -> dict:
    return dict(source=source, n=data.n, m=data.m, lambda_hat=mle_lambda(data).lambda_hat,
                fisher_index=data.fisher_index())


def cmd_test(args) -> RunReport:
    data = load_dataset(args.data)
    ids = parse_statistics(args.tests)
    outcomes = bootstrap_pvalues(data, ids, args.reps, RngHandle(args.seed), (args.alpha,), args.laplace_a)
    rows = [ReportRow(sid, o.statistic, o.p_value, o.reject_at[args.alpha]) for sid, o in outcomes.items()]
    degenerate = any(o.degenerate for o in outcomes.values())
    return RunReport(rows=rows, alpha=args.alpha, reps=args.reps, seed=args.seed,
                     degenerate=degenerate, **_summary(data, args.data))


def cmd_stat(args) -> RunReport:
    data = load_dataset(args.data)
    ids = parse_statistics(args.tests)
    fit = mle_lambda(data)
    values = statistic_matrix(data.observations[None, :], [fit.lambda_hat], args.laplace_a)[0]
    rows = [ReportRow(sid, float(values[sid.column])) for sid in ids]
    return RunReport(rows=rows, degenerate=fit.degenerate, **_summary(data, args.data))


def cmd_power(args):
    config = load_config(args.config, args.preset)
    if args.reps is not None:
        config.replications = args.reps
    if args.seed is not None:
        config.seed = args.seed
    if args.laplace_a is not None:
        config.laplace_a = args.laplace_a
    config.__post_init__()
    table = warp_speed_power(config, workers=args.workers)
    if args.out:
        out = Path(args.out)
        table.write_csv(out)
        out.with_suffix(".txt").write_text(table.to_text())
    return table


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poisgof", description="Goodness-of-fit tests for the Poisson distribution.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_opts(p):
        p.add_argument("--data", required=True,
                       help="dataset file (raw or value,count lines) or a bundled name: sparrow, horsekicks")
        p.add_argument("--tests", default="all", help="comma separated statistic names or 'all'")
        p.add_argument("--laplace-a", type=float, default=1.0, help="Laplace weight parameter a (default 1)")

    p = sub.add_parser("test", help="statistics with parametric bootstrap p-values")
    data_opts(p)
    p.add_argument("--reps", type=int, default=10_000, help="bootstrap replications B")
    p.add_argument("--alpha", type=float, default=0.10, help="level for the reported decision")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--format", choices=("human", "csv", "jsonl"), default="human")

    p = sub.add_parser("stat", help="statistic values only")
    data_opts(p)
    p.add_argument("--format", choices=("human", "csv", "jsonl"), default="human")

    p = sub.add_parser("power", help="warp-speed bootstrap power study")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--preset", help=f"bundled config: {', '.join(PRESETS)}")
    p.add_argument("--out", help="CSV output path; an aligned table is written next to it as .txt")
    p.add_argument("--workers", type=int, default=1, help="worker processes (0 = all cores)")
    p.add_argument("--reps", type=int, default=None, help="override the number of replications M")
    p.add_argument("--seed", type=_u64, default=None, help="override the seed")
    p.add_argument("--laplace-a", type=float, default=None)
    p.add_argument("--format", choices=("human", "csv"), default="human")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        if args.command == "test":
            sys.stdout.write(cmd_test(args).render(args.format))
        elif args.command == "stat":
            sys.stdout.write(cmd_stat(args).render(args.format))
        else:
            table = cmd_power(args)
            sys.stdout.write(table.to_text() if args.format == "human" else table.to_csv())
    except DomainError as exc:
        print(f"poisgof: error: {exc}", file=sys.stderr)
        return 2
    except (DatasetError, ConfigError, UsageError, OSError) as exc:
        print(f"poisgof: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
