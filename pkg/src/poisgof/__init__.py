"""Goodness-of-fit tests for the Poisson distribution based on the empirical weight function."""

from poisgof.bootstrap import (
    BootstrapOutcome,
    PowerStudyConfig,
    PowerTable,
    bootstrap_pvalue,
    bootstrap_pvalues,
    critical_value,
    warp_speed_power,
)
from poisgof.distributions import (
    DomainError,
    RngHandle,
    fisher_index,
    parse_alternative,
    poisson_cdf,
    poisson_log_pmf,
    poisson_tail_max,
    sample,
)
from poisgof.empirical import CountSample, FittedNull, mle_lambda
from poisgof.kernels import BACKEND
from poisgof.statistics import StatisticId, compute, evaluate, parse_statistics

__version__ = "0.1.0"
