"""Deterministic per-trial random streams.

Every Monte Carlo trial owns a PCG64 generator seeded through SeedSequence
from the tuple ``(master_seed, kind, key1, key2, trial)``. Trials are
therefore independent of execution order and of the number of worker
threads, and a rerun with the same master seed reproduces every trajectory
bit for bit. The local dataset deliberately leaves the entanglement depth
out of the key (``key2 = 0``), which makes the depth collapse of the metric
coordinate exact rather than merely statistical.
"""

from __future__ import annotations

import numpy as np

# stream kinds: first entropy word after the master seed
KIND_PROTOCOL = 0
KIND_LOCAL = 1
KIND_GLOBAL = 2
KIND_MULTISCALE = 3
KIND_RUNLENGTH = 4


def trial_stream(
    master_seed: int, kind: int, key1: int, key2: int, trial: int
) -> np.random.Generator:
    """Independent generator for one trial of one experiment cell."""
    entropy = (master_seed, kind, key1, key2, trial)
    for name, value in zip(("master_seed", "kind", "key1", "key2", "trial"), entropy):
        if int(value) != value or value < 0:
            raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
