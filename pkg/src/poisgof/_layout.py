"""Constants shared by both kernel backends."""

import math

# Column order of the statistic matrix returned by ``all_statistics``.
STAT_COLUMNS = (
    "t1-fit",
    "t1-emp",
    "t1-lap",
    "t2-fit",
    "t2-emp",
    "t2-lap",
    "tinf-fit",
    "tinf-emp",
    "tinf-lap",
    "ks",
    "cv",
    "ad",
    "kl",
    "id",
)
N_STATS = len(STAT_COLUMNS)

# Cramer-von Mises and Anderson-Darling sums stop at x = 100.
CV_AD_LAST = 100

LOG_DBL_MAX = math.log(1.7976931348623157e308)


def grid_size(lam, m):
    """Number of support points ``0 .. G-1`` evaluated for one sample.

    Covers the CV/AD range, ``m + 1`` and enough of the Poisson upper tail
    that the neglected mass is far below double precision.
    """
    tail = int(math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0))
    return max(CV_AD_LAST + 1, int(m) + 2, tail)


def inversion_limit(lam):
    """Largest value the sequential-search Poisson sampler can return."""
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0))
