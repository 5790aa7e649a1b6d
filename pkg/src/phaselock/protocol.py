"""One-bit adaptive lock-in controller (reference implementation).

Each shot yields a single success/failure bit. Success freezes the control
and extends the streak counter; failure resets the counter and kicks the
control by a random step whose size decays with the streak length held
before the failure. A trajectory halts once the streak reaches ``m_halt``,
so its last ``m_halt`` outcomes were generated at one fixed control value --
that frozen tail is what the certificate calculus in
:mod:`phaselock.certificates` prices.

This module accepts arbitrary success-probability landscapes and is the
ground truth the specialized numba kernels are cross-checked against
(same update rule, same draw order; see tests). For production Monte Carlo
use :mod:`phaselock.experiments`, which drives the compiled kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .probes import wrap_phase


@dataclass(frozen=True)
class ProtocolParams:
    """Step-size law, halting threshold, and post-update reductions.

    a: step amplitude (radians), > 0.
    b: decay exponent of the step size in the pre-failure streak, >= 0.
    m_halt: consecutive successes required to halt, >= 1.
    clip: half-width of the clipping interval applied after an update
        (None disables clipping; 0 pins the control at the origin, useful
        for frozen-control statistics).
    wrap: reduce the control to the principal interval (-pi, pi] after
        updates.
    """

    a: float
    b: float
    m_halt: int
    clip: float | None = None
    wrap: bool = False

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"step amplitude a must be > 0, got {self.a!r}")
        if self.b < 0:
            raise ValueError(f"step decay exponent b must be >= 0, got {self.b!r}")
        if int(self.m_halt) != self.m_halt or self.m_halt < 1:
            raise ValueError(f"m_halt must be a positive integer, got {self.m_halt!r}")
        if self.clip is not None and not self.clip >= 0:
            raise ValueError(f"clip half-width must be >= 0, got {self.clip!r}")


@dataclass(frozen=True)
class ControllerState:
    """x: control mismatch (radians); m_s: current success streak; n: shots used."""

    x: float
    m_s: int = 0
    n: int = 0


@dataclass(frozen=True)
class ShotOutcome:
    """One shot's result. step_applied is the drawn increment (0.0 on success);
    clipping or wrapping may reduce the realized change of x below it."""

    success: bool
    step_applied: float


@dataclass(frozen=True)
class TrajectoryRecord:
    """Summary of a halted trajectory."""

    halt_time: int
    terminal_x: float
    terminal_infidelity: float
    failures: int


class BudgetExhaustedError(RuntimeError):
    """Raised when a trajectory hits its shot budget without halting.

    Carries the partial controller state so callers can report it; the
    protocol never fabricates a halt.
    """

    def __init__(self, state: ControllerState, max_shots: int):
        self.state = state
        self.max_shots = max_shots
        super().__init__(
            f"no halt within {max_shots} shots (x={state.x:.6g}, streak={state.m_s})"
        )


def step_size(params: ProtocolParams, m_s_prev: int) -> float:
    """Step magnitude a*(m_s_prev + 1)^(-b) for a failure observed at streak
    m_s_prev (the counter value before the failing shot resets it)."""
    if m_s_prev < 0:
        raise ValueError(f"streak must be non-negative, got {m_s_prev}")
    return params.a * (m_s_prev + 1.0) ** (-params.b)


def step(
    state: ControllerState,
    params: ProtocolParams,
    success_prob_at: Callable[[float], float],
    rng: np.random.Generator,
) -> tuple[ControllerState, ShotOutcome]:
    """Consume one shot and return the updated state plus the outcome."""
    p = float(success_prob_at(state.x))
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"success probability {p!r} outside [0, 1] at x={state.x!r}")
    if rng.random() < p:
        return ControllerState(state.x, state.m_s + 1, state.n + 1), ShotOutcome(True, 0.0)
    delta = step_size(params, state.m_s) * (2.0 * rng.random() - 1.0)
    x = state.x + delta
    if params.clip is not None:
        x = min(max(x, -params.clip), params.clip)
    if params.wrap:
        x = float(wrap_phase(x))
    return ControllerState(x, 0, state.n + 1), ShotOutcome(False, delta)


def run_to_halt(
    x0: float,
    params: ProtocolParams,
    success_prob_at: Callable[[float], float],
    rng: np.random.Generator,
    max_shots: int = 1_000_000,
) -> TrajectoryRecord:
    """Iterate :func:`step` until m_halt consecutive successes.

    Raises BudgetExhaustedError if max_shots is reached first.
    """
    if max_shots < params.m_halt:
        raise ValueError(f"max_shots={max_shots} cannot cover a streak of {params.m_halt}")
    state = ControllerState(float(x0))
    failures = 0
    while state.m_s < params.m_halt:
        if state.n >= max_shots:
            raise BudgetExhaustedError(state, max_shots)
        state, outcome = step(state, params, success_prob_at, rng)
        if not outcome.success:
            failures += 1
    return TrajectoryRecord(
        halt_time=state.n,
        terminal_x=state.x,
        terminal_infidelity=1.0 - float(success_prob_at(state.x)),
        failures=failures,
    )
