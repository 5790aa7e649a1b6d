"""JIT backend selection.

The simulation kernels are plain Python scalar loops over numpy types and are
compiled with numba's ``@njit`` by default. Setting the environment variable
``PHASELOCK_NUMBA`` to ``0``/``false``/``off`` runs the same source uncompiled
(orders of magnitude slower, but convenient for debugging and for
environments without numba). Both backends consume random draws in the same
order from the same bit generators, so they produce identical trajectories;
``benchmarks/bench_backends.py`` times one against the other.
"""

from __future__ import annotations

import os
import warnings

_FALSY = ("0", "false", "off", "no")

NUMBA_REQUESTED = os.environ.get("PHASELOCK_NUMBA", "1").strip().lower() not in _FALSY

HAVE_NUMBA = False
if NUMBA_REQUESTED:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        warnings.warn(
            "numba is not importable; phaselock kernels will run uncompiled "
            "(set PHASELOCK_NUMBA=0 to silence this warning)",
            RuntimeWarning,
            stacklevel=2,
        )

JIT_ENABLED = NUMBA_REQUESTED and HAVE_NUMBA
BACKEND = "numba" if JIT_ENABLED else "numpy"


def compile_kernel(func):
    """numba-compiled variant of ``func``, or None when numba is unavailable.

    ``nogil`` lets thread pools run trials in parallel; ``cache`` persists the
    compiled machine code across processes (important for short CLI runs).
    """
    if not HAVE_NUMBA:
        return None
    from numba import njit

    return njit(nogil=True, cache=True)(func)


def select(py_func, jit_func):
    """Pick the backend honoring the PHASELOCK_NUMBA flag."""
    if JIT_ENABLED and jit_func is not None:
        return jit_func
    return py_func
