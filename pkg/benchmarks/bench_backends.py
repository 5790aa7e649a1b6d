#!/usr/bin/env python3
"""Time the numba-compiled kernels against the uncompiled fallback.

Runs the same metric-coordinate trials through both backends, checks that
the outputs are bit-identical (same source, same draw order, same bit
generators), and reports shots/second. Run with the default environment;
PHASELOCK_NUMBA=0 would leave no compiled variant to compare against.
"""

import argparse
import math
import time

import numpy as np

from phaselock.kernels import metric_trial_jit, metric_trial_py
from phaselock.rng import KIND_LOCAL, trial_stream

HALF_PI = math.pi / 2


def run_backend(kernel, seed, trials, m_halt, a, b):
    out = np.empty((trials, 3))
    shots = 0
    for i in range(trials):
        g = trial_stream(seed, KIND_LOCAL, m_halt, 0, i)
        x0 = HALF_PI * (2.0 * g.random() - 1.0)
        t, x, f, ex = kernel(g, x0, a, b, m_halt, HALF_PI, math.inf, 10_000_000)
        out[i] = (t, x, f)
        shots += t
    return out, shots


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--m-halt", type=int, default=160)
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--a", type=float, default=0.3)
    parser.add_argument("--b", type=float, default=0.5)
    args = parser.parse_args()

    if metric_trial_jit is None:
        parser.error("no compiled kernel available (numba missing or PHASELOCK_NUMBA=0)")

    # compile outside the timed region
    warm = trial_stream(args.seed, KIND_LOCAL, 1, 0, 0)
    metric_trial_jit(warm, 0.1, args.a, args.b, 1, HALF_PI, math.inf, 1000)

    t0 = time.perf_counter()
    jit_out, shots = run_backend(metric_trial_jit, args.seed, args.trials, args.m_halt, args.a, args.b)
    jit_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    py_out, _ = run_backend(metric_trial_py, args.seed, args.trials, args.m_halt, args.a, args.b)
    py_s = time.perf_counter() - t0

    if not np.array_equal(jit_out, py_out):
        raise SystemExit("FAIL: backends disagree")

    print(f"backends agree on {args.trials} trials ({shots} shots)")
    print(f"numba : {jit_s:8.3f} s  ({shots / jit_s / 1e6:8.2f} M shots/s)")
    print(f"numpy : {py_s:8.3f} s  ({shots / py_s / 1e6:8.2f} M shots/s)")
    print(f"speedup: {py_s / jit_s:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
