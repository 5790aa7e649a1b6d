"""Run-length evidence calculus and Bernoulli Fisher information.

A halted trajectory ends with ``m_halt`` consecutive successes generated at
a frozen control. Under infidelity eps that terminal streak has probability
(1 - eps)^m_halt, which is monotone decreasing in eps, so observing it
excludes every infidelity above

    cert_scale(m_halt, eta) = 1 - eta^(1/m_halt)  ~  ln(1/eta) / m_halt

at significance eta. Near a lock point the landscape is quadratic,
eps ~= F_Q * delta^2 / 4, so the infidelity scale converts into the
parameter half-width 2/sqrt(F_Q) * sqrt(cert_scale). The same geometry makes
the one-bit record locally lossless: its classical Fisher information
dp^2 / (p(1-p)) approaches the probe QFI as the mismatch vanishes (and for
the entangled-fringe family it equals the QFI identically away from the
degenerate points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Certificate",
    "certificate",
    "run_probability",
    "null_bound",
    "cert_scale",
    "cert_scale_asymptotic",
    "param_certificate",
    "monitored_infidelity",
    "monitored_param",
    "expected_run_length",
    "classical_fisher",
    "fisher_matching_curve",
]


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"infidelity must lie in [0, 1], got {eps!r}")


def _check_m_halt(m_halt: int) -> None:
    if int(m_halt) != m_halt or m_halt < 1:
        raise ValueError(f"m_halt must be a positive integer, got {m_halt!r}")


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"significance must lie in (0, 1], got {eta!r}")


def _check_qfi(f_q: float) -> None:
    if not f_q > 0:
        raise ValueError(f"Fisher information must be > 0, got {f_q!r}")


def run_probability(eps: float, m_halt: int) -> float:
    """Probability (1 - eps)^m_halt of a success streak of length m_halt at
    frozen infidelity eps."""
    _check_eps(eps)
    _check_m_halt(m_halt)
    return (1.0 - eps) ** m_halt


def null_bound(eps0: float, m_halt: int) -> float:
    """Largest streak probability compatible with the one-sided null
    "infidelity >= eps0"; by monotonicity the supremum sits at eps0."""
    return run_probability(eps0, m_halt)


def cert_scale(m_halt: int, eta: float) -> float:
    """Certified infidelity scale 1 - eta^(1/m_halt).

    Evaluated as -expm1(log(eta)/m_halt), which stays accurate to full double
    precision when m_halt is large and the scale is tiny.
    """
    _check_m_halt(m_halt)
    _check_eta(eta)
    return -math.expm1(math.log(eta) / m_halt)


def cert_scale_asymptotic(m_halt: int, eta: float) -> float:
    """Leading-order certificate scale ln(1/eta) / m_halt."""
    _check_m_halt(m_halt)
    _check_eta(eta)
    return math.log(1.0 / eta) / m_halt


def param_certificate(m_halt: int, eta: float, f_q: float) -> float:
    """Certified parameter half-width 2/sqrt(F_Q) * sqrt(cert_scale)."""
    _check_qfi(f_q)
    return 2.0 / math.sqrt(f_q) * math.sqrt(cert_scale(m_halt, eta))


@dataclass(frozen=True)
class Certificate:
    """Evidence summary of a terminal streak: the halting threshold, the
    significance, the certified infidelity scale, and (when a Fisher
    information was supplied) the certified parameter half-width."""

    m_halt: int
    significance: float
    eps_cert: float
    param_cert: float | None = None


def certificate(m_halt: int, eta: float, f_q: float | None = None) -> Certificate:
    """Bundle cert_scale (and param_certificate when f_q is given)."""
    eps = cert_scale(m_halt, eta)
    param = None if f_q is None else param_certificate(m_halt, eta, f_q)
    return Certificate(m_halt=m_halt, significance=eta, eps_cert=eps, param_cert=param)


def monitored_infidelity(m_s: int) -> float:
    """Running infidelity proxy 1/(1 + m_s) read off the live streak counter
    (the inverse of the mean streak length (1-eps)/eps)."""
    if m_s < 0:
        raise ValueError(f"streak must be non-negative, got {m_s!r}")
    return 1.0 / (1.0 + m_s)


def monitored_param(m_s: int, f_q: float) -> float:
    """Running parameter-error proxy 2/sqrt(F_Q) / sqrt(1 + m_s)."""
    if m_s < 0:
        raise ValueError(f"streak must be non-negative, got {m_s!r}")
    _check_qfi(f_q)
    return 2.0 / math.sqrt(f_q) / math.sqrt(1.0 + m_s)


def expected_run_length(eps: float) -> float:
    """Mean streak length (1 - eps)/eps between failures at frozen
    infidelity eps in (0, 1]."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"infidelity must lie in (0, 1], got {eps!r}")
    return (1.0 - eps) / eps


def classical_fisher(p: float, dp: float) -> float:
    """Fisher information dp^2 / (p(1-p)) of one Bernoulli outcome with
    success probability p and sensitivity dp = dp/dparameter.

    Degenerate at p in {0, 1} (a 0/0 limit there): raises so the caller
    substitutes the analytic limit of its landscape instead of propagating
    NaN into tables; see fisher_matching_curve.
    """
    _check_eps(p)
    if p == 0.0 or p == 1.0:
        raise ValueError(
            f"Bernoulli Fisher information is degenerate at p={p}; "
            "take the analytic limit of the landscape instead"
        )
    return dp * dp / (p * (1.0 - p))


def fisher_matching_curve(probe, deltas, method: str = "analytic", fd_step: float = 1e-6):
    """Classical Fisher information of the one-bit record along a mismatch
    grid, next to the probe QFI.

    Returns an (n, 3) array with columns (delta, i_cl, qfi). method
    "analytic" uses the probe's derivative; "fd" uses a centered difference
    with the given step (accuracy degrades near fringe extrema, where the
    denominator p(1-p) vanishes). Grid points where p(1-p) is exactly zero
    are filled with the local limit, which equals the QFI.
    """
    if method not in ("analytic", "fd"):
        raise ValueError(f"method must be 'analytic' or 'fd', got {method!r}")
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    f_q = probe.qfi()
    out = np.empty((deltas.size, 3))
    for i, d in enumerate(deltas):
        p = float(probe.success_prob(d))
        if method == "analytic":
            dp = float(probe.success_prob_derivative(d))
        else:
            dp = float(probe.success_prob(d + fd_step) - probe.success_prob(d - fd_step))
            dp /= 2.0 * fd_step
        denom = p * (1.0 - p)
        i_cl = f_q if denom == 0.0 else dp * dp / denom
        out[i, 0] = d
        out[i, 1] = i_cl
        out[i, 2] = f_q
    return out
