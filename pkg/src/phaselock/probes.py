"""Interferometric probe family and phase-coordinate conventions.

A depth-m probe interrogates the phase with an m-fold magnified fringe:
success probability cos^2(m*delta/2) in the physical mismatch delta, fringe
period 2*pi/m, quantum Fisher information m^2. In the metric coordinate
x = m*delta the landscape is depth-independent, which is what lets one
simulation serve every depth.

Probe objects are duck-typed: anything with ``depth``, ``success_prob``,
``success_prob_derivative`` and ``qfi`` can be used by the certificate and
experiment layers. Only the entangled-fringe family is shipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_phase(angle):
    """Reduce an angle to the principal interval (-pi, pi].

    Idempotent, vectorizes over arrays. The upper boundary is closed:
    wrap_phase(pi) == pi and wrap_phase(-pi) == pi.
    """
    return np.pi - np.mod(np.pi - angle, TWO_PI)


def metric_success_prob(x):
    """Depth-independent success landscape cos^2(x/2) in the metric coordinate."""
    return np.cos(0.5 * x) ** 2


def metric_infidelity(x):
    """1 - metric_success_prob(x), evaluated as sin^2(x/2) for small-x accuracy."""
    return np.sin(0.5 * x) ** 2


def local_infidelity_model(f_q, delta):
    """Quadratic small-mismatch law: infidelity ~= F_Q * delta^2 / 4."""
    return 0.25 * f_q * np.asarray(delta) ** 2


@dataclass(frozen=True)
class NoonProbe:
    """m-particle entangled phase probe (m = ``depth``, particles per shot)."""

    depth: int

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth!r}")

    def success_prob(self, physical_mismatch):
        """cos^2(m*delta/2); period 2*pi/m, even in delta."""
        return np.cos(0.5 * self.depth * physical_mismatch) ** 2

    def infidelity(self, physical_mismatch):
        """sin^2(m*delta/2), the exact complement of success_prob."""
        return np.sin(0.5 * self.depth * physical_mismatch) ** 2

    def success_prob_derivative(self, physical_mismatch):
        """d(success_prob)/d(delta) = -(m/2) sin(m*delta)."""
        return -0.5 * self.depth * np.sin(self.depth * physical_mismatch)

    def qfi(self) -> float:
        """Quantum Fisher information of one shot: m^2."""
        return float(self.depth) ** 2


@dataclass(frozen=True)
class Mismatch:
    """A compensation error in both coordinates; metric = depth * physical."""

    physical: float
    metric: float

    @classmethod
    def from_physical(cls, depth: int, physical: float) -> "Mismatch":
        return cls(physical, depth * physical)

    @classmethod
    def from_metric(cls, depth: int, metric: float) -> "Mismatch":
        return cls(metric / depth, metric)
