#!/usr/bin/env python3
"""Regenerate golden_trajectory.json.

Deliberately re-implements the one-bit update rule inline (no imports from
the package) so the frozen file is an independent record of the rule:
success iff u < cos^2(x/2) with u = rng.random(); on failure the control
moves by a*(streak+1)^(-b) * (2*rng.random() - 1) using the streak held
before the failing shot, then is clipped; halting after m_halt consecutive
successes. Streams come from the package-wide derivation contract
SeedSequence((master_seed, kind, key1, key2, trial)).
"""

import json
import math
from pathlib import Path

import numpy as np

MASTER_SEED = 20260809
STREAM = (MASTER_SEED, 0, 0, 0, 0)  # kind 0 = protocol-level stream
A = 0.3
B = 0.5
M_HALT = 20
CLIP = math.pi / 2
X0 = 0.4


def main() -> None:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(STREAM)))
    x = X0
    streak = 0
    shots = []
    failures = 0
    while streak < M_HALT:
        p = np.cos(0.5 * x) ** 2
        if rng.random() < p:
            streak += 1
            step = 0.0
            success = True
        else:
            step = A * (streak + 1.0) ** (-B) * (2.0 * rng.random() - 1.0)
            x = min(max(x + step, -CLIP), CLIP)
            streak = 0
            failures += 1
            success = False
        shots.append({"success": success, "step_applied": step, "x": x, "m_s": streak})

    record = {
        "halt_time": len(shots),
        "terminal_x": x,
        "terminal_infidelity": 1.0 - float(np.cos(0.5 * x) ** 2),
        "failures": failures,
    }
    payload = {
        "stream": list(STREAM),
        "params": {"a": A, "b": B, "m_halt": M_HALT, "clip": CLIP, "wrap": False},
        "x0": X0,
        "shots": shots,
        "record": record,
    }
    out = Path(__file__).with_name("golden_trajectory.json")
    out.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {out} ({len(shots)} shots, {failures} failures)")


if __name__ == "__main__":
    main()
