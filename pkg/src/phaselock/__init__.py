"""One-bit adaptive phase locking.

A simulator and analysis library for an adaptive estimator that learns a
compensation phase from single success/failure bits, freezes on success,
random-steps on failure, and halts after a prescribed streak of consecutive
successes. The streak doubles as statistical evidence: the package computes
the resulting infidelity/parameter certificates, the Fisher information of
the one-bit record, and the Monte Carlo scaling laws of entangled-probe
interferometry (fixed-depth locking, single-scale fringe aliasing, and a
coarse-to-fine cascade).
"""

from ._jit import BACKEND, JIT_ENABLED
from .certificates import (
    Certificate,
    cert_scale,
    cert_scale_asymptotic,
    certificate,
    classical_fisher,
    expected_run_length,
    fisher_matching_curve,
    monitored_infidelity,
    monitored_param,
    null_bound,
    param_certificate,
    run_probability,
)
from .experiments import (
    CellResult,
    GlobalConfig,
    LocalConfig,
    MultiscaleConfig,
    MultiscaleResult,
    StageStats,
    crb_overlay,
    run_global_aliasing,
    run_local_fixed_depth,
    run_multiscale,
    sample_run_lengths,
)
from .probes import (
    Mismatch,
    NoonProbe,
    local_infidelity_model,
    metric_infidelity,
    metric_success_prob,
    wrap_phase,
)
from .protocol import (
    BudgetExhaustedError,
    ControllerState,
    ProtocolParams,
    ShotOutcome,
    TrajectoryRecord,
    run_to_halt,
    step,
    step_size,
)
from .stats import FitResult, mean_stderr, ols_loglog, rmse

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "JIT_ENABLED",
    "BudgetExhaustedError",
    "CellResult",
    "Certificate",
    "ControllerState",
    "FitResult",
    "GlobalConfig",
    "LocalConfig",
    "Mismatch",
    "MultiscaleConfig",
    "MultiscaleResult",
    "NoonProbe",
    "ProtocolParams",
    "ShotOutcome",
    "StageStats",
    "TrajectoryRecord",
    "cert_scale",
    "cert_scale_asymptotic",
    "certificate",
    "classical_fisher",
    "crb_overlay",
    "expected_run_length",
    "fisher_matching_curve",
    "local_infidelity_model",
    "mean_stderr",
    "metric_infidelity",
    "metric_success_prob",
    "monitored_infidelity",
    "monitored_param",
    "null_bound",
    "ols_loglog",
    "param_certificate",
    "rmse",
    "run_global_aliasing",
    "run_local_fixed_depth",
    "run_multiscale",
    "run_probability",
    "run_to_halt",
    "sample_run_lengths",
    "step",
    "step_size",
    "wrap_phase",
    "__version__",
]
