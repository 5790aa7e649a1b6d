"""Hot per-trajectory simulation loops.

Draw convention, shared by every kernel and by the reference implementation
in :mod:`phaselock.protocol`: each shot consumes one uniform for the success
test (success iff ``u < p``), and each failure consumes one more uniform for
the step direction ``r = 2u - 1``. The ``*_py`` names run the source
uncompiled, the ``*_jit`` names are the numba builds (None without numba),
and the bare names point at the selected backend (see ``_jit.BACKEND``).
"""

from __future__ import annotations

import numpy as np

from ._jit import BACKEND, JIT_ENABLED, compile_kernel, select

__all__ = [
    "BACKEND",
    "JIT_ENABLED",
    "metric_trial",
    "metric_trial_py",
    "metric_trial_jit",
    "run_lengths",
    "run_lengths_py",
    "run_lengths_jit",
]


def _metric_trial(rng, x0, a, b, m_halt, clip_halfwidth, wrap_halfperiod, max_shots):
    """Run one trajectory of the one-bit lock in the metric coordinate.

    Success probability is cos^2(x/2). A failure moves the control by
    a*(streak+1)^(-b) * r with r ~ U[-1, 1], using the streak length held
    before the failing shot, then clips x to [-clip_halfwidth, clip_halfwidth]
    and wraps it to (-wrap_halfperiod, wrap_halfperiod]; pass inf to disable
    either reduction. Halts once the streak reaches m_halt.

    Returns (shots, terminal_x, failures, exhausted).
    """
    x = x0
    streak = 0
    shots = 0
    failures = 0
    while streak < m_halt:
        if shots >= max_shots:
            return shots, x, failures, True
        shots += 1
        p = np.cos(0.5 * x) ** 2
        if rng.random() < p:
            streak += 1
        else:
            x += a * (streak + 1.0) ** (-b) * (2.0 * rng.random() - 1.0)
            if x > clip_halfwidth:
                x = clip_halfwidth
            elif x < -clip_halfwidth:
                x = -clip_halfwidth
            if np.isfinite(wrap_halfperiod):
                x = wrap_halfperiod - (wrap_halfperiod - x) % (2.0 * wrap_halfperiod)
            streak = 0
            failures += 1
    return shots, x, failures, False


def _run_lengths(rng, eps, n_samples):
    """Streak lengths between failures at a fixed infidelity eps in (0, 1]."""
    out = np.empty(n_samples, dtype=np.int64)
    p = 1.0 - eps
    for i in range(n_samples):
        streak = 0
        while rng.random() < p:
            streak += 1
        out[i] = streak
    return out


metric_trial_py = _metric_trial
metric_trial_jit = compile_kernel(_metric_trial)
metric_trial = select(metric_trial_py, metric_trial_jit)

run_lengths_py = _run_lengths
run_lengths_jit = compile_kernel(_run_lengths)
run_lengths = select(run_lengths_py, run_lengths_jit)
