"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation takes over. Set ``POISGOF_BACKEND=python`` to force the
fallback.

Exports
-------
poisson_inversion(lam, u)
    Sequential-search inversion of uniforms ``u`` into Poisson(lam) counts.
all_statistics(values, lam, a)
    Matrix of all fourteen statistics, one row per sample in ``values``
    (shape ``(rows, n)``), each evaluated at its own ``lam``.
"""

import os

from poisgof._layout import STAT_COLUMNS, N_STATS  # noqa: F401
from poisgof import _pykernels

BACKEND = "python"
poisson_inversion = _pykernels.poisson_inversion
all_statistics = _pykernels.all_statistics

if os.environ.get("POISGOF_BACKEND", "").lower() != "python":
    try:
        from poisgof import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    if _ckernels is not None:
        BACKEND = "cython"
        poisson_inversion = _ckernels.poisson_inversion
        all_statistics = _ckernels.all_statistics


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _pykernels}
    try:
        from poisgof import _ckernels as ck

        found["cython"] = ck
    except ImportError:
        pass
    return found
