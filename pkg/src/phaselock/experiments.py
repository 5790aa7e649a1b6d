"""Monte Carlo experiment drivers.

Three datasets:

* local fixed-depth -- branch-resolved locking in the depth-independent
  metric coordinate: initial mismatch uniform on [-pi/2, pi/2], failure
  updates clipped back into that interval. Depth enters only through the
  resource count R = m * nu and the physical error x/m, so by default all
  depths share per-trial streams and the depth collapse is exact (identical
  nu and infidelity columns, physical RMSE exactly rmse_x / m).
* global single-scale -- uniform prior over the full phase interval at a
  fixed depth, mismatch wrapped to the principal interval after every
  update, no clipping. Exposes fringe aliasing: infidelity keeps falling
  with resource while the physical RMSE saturates at the wrong-fringe
  plateau.
* multiscale cascade -- stage j runs the metric-coordinate lock at depth 2^j
  with a fixed halting streak, then hands the doubled, clipped mismatch to
  stage j+1. One pass over the deepest cascade yields every shallower sweep
  as a prefix.

Trials are embarrassingly parallel: each one derives its own stream
(:mod:`phaselock.rng`) and writes into a preallocated slot, and aggregation
reads the arrays in trial order, so results are independent of thread count.
Statistics are computed over halted trials only; budget-exhausted trials are
counted in the ``exhausted`` column and never folded into means.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .protocol import BudgetExhaustedError, ProtocolParams, run_to_halt
from .rng import KIND_GLOBAL, KIND_LOCAL, KIND_MULTISCALE, KIND_RUNLENGTH, trial_stream
from .stats import mean_stderr, ols_loglog, rmse, rmse_stderr

HALF_PI = math.pi / 2
DEFAULT_SEED = 12345

PAPER_DEPTHS = (1, 2, 4, 8)
PAPER_HALTS = (20, 40, 80, 160, 320, 640)


def _check_positive_ints(name, values):
    for v in values:
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be positive integers, got {values!r}")


def _check_common(trials, a, b, master_seed, max_shots, m_halts):
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if not a > 0:
        raise ValueError(f"step amplitude a must be > 0, got {a!r}")
    if b < 0:
        raise ValueError(f"step decay exponent b must be >= 0, got {b!r}")
    if master_seed < 0:
        raise ValueError(f"master_seed must be non-negative, got {master_seed!r}")
    if max_shots < max(m_halts):
        raise ValueError(f"max_shots={max_shots} cannot cover a streak of {max(m_halts)}")


@dataclass(frozen=True)
class LocalConfig:
    """Grid configuration for the local fixed-depth dataset."""

    depths: tuple[int, ...] = PAPER_DEPTHS
    halts: tuple[int, ...] = PAPER_HALTS
    trials: int = 10_000
    a: float = 0.3
    b: float = 0.5
    init_halfwidth: float = HALF_PI
    clip_halfwidth: float = HALF_PI
    master_seed: int = DEFAULT_SEED
    max_shots: int = 1_000_000
    share_streams: bool = True  # same per-trial streams for every depth

    def __post_init__(self):
        object.__setattr__(self, "depths", tuple(self.depths))
        object.__setattr__(self, "halts", tuple(self.halts))
        if not self.depths or not self.halts:
            raise ValueError("depth and halt grids must be non-empty")
        _check_positive_ints("depths", self.depths)
        _check_positive_ints("halts", self.halts)
        _check_common(self.trials, self.a, self.b, self.master_seed, self.max_shots, self.halts)
        if not self.init_halfwidth > 0 or not self.clip_halfwidth > 0:
            raise ValueError("init_halfwidth and clip_halfwidth must be > 0")


@dataclass(frozen=True)
class GlobalConfig:
    """Configuration for the global single-scale dataset at one depth."""

    depth: int = 8
    halts: tuple[int, ...] = PAPER_HALTS
    trials: int = 10_000
    a: float = 0.3
    b: float = 0.5
    init_halfwidth: float = math.pi  # physical prior half-width
    master_seed: int = DEFAULT_SEED
    max_shots: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "halts", tuple(self.halts))
        if not self.halts:
            raise ValueError("halt grid must be non-empty")
        _check_positive_ints("depth", (self.depth,))
        _check_positive_ints("halts", self.halts)
        _check_common(self.trials, self.a, self.b, self.master_seed, self.max_shots, self.halts)
        if not 0 < self.init_halfwidth <= math.pi:
            raise ValueError(f"init_halfwidth must lie in (0, pi], got {self.init_halfwidth!r}")


@dataclass(frozen=True)
class MultiscaleConfig:
    """Configuration for the coarse-to-fine cascade (stages 0..max_stage)."""

    max_stage: int = 7
    m_halt: int = 320
    trials: int = 10_000
    a: float = 0.3
    b: float = 0.5
    init_halfwidth: float = HALF_PI
    clip_halfwidth: float = HALF_PI
    master_seed: int = DEFAULT_SEED
    max_shots: int = 1_000_000

    def __post_init__(self):
        if int(self.max_stage) != self.max_stage or self.max_stage < 0:
            raise ValueError(f"max_stage must be a non-negative integer, got {self.max_stage!r}")
        _check_positive_ints("m_halt", (self.m_halt,))
        _check_common(self.trials, self.a, self.b, self.master_seed, self.max_shots, (self.m_halt,))
        if not self.init_halfwidth > 0 or not self.clip_halfwidth > 0:
            raise ValueError("init_halfwidth and clip_halfwidth must be > 0")


@dataclass(frozen=True)
class CellResult:
    """Aggregated statistics of one (dataset, m, m_halt) grid cell.

    nu is the mean halting time over halted trials; r_total = m * nu is the
    particle count; rmse_theta is the physical phase RMSE. ``trials`` is the
    configured count; ``exhausted`` trials are excluded from every statistic.
    """

    dataset: str
    m: int
    m_halt: int
    trials: int
    nu: float
    nu_stderr: float
    r_total: float
    mean_eps: float
    eps_stderr: float
    rmse_theta: float
    rmse_stderr: float
    exhausted: int


@dataclass(frozen=True)
class StageStats:
    """Per-stage cost breakdown of the cascade."""

    stage: int
    depth: int
    halt_mean: float
    resource_mean: float  # depth * halt_mean


@dataclass(frozen=True)
class MultiscaleResult:
    """Cascade summary for stages 0..stage_max."""

    stage_max: int
    trials: int
    r_total_mean: float
    r_total_stderr: float
    rmse_final: float
    rmse_stderr: float
    exhausted: int
    stages: tuple[StageStats, ...] = field(repr=False)


@dataclass
class TrialBatch:
    """Raw per-trial outputs of one cell, in trial order. terminal_eps is the
    infidelity of the terminal control under whichever landscape generated
    the batch (sin^2(x/2) for the builtin one)."""

    halt_time: np.ndarray
    terminal_x: np.ndarray
    terminal_eps: np.ndarray
    failures: np.ndarray
    exhausted: np.ndarray

    @property
    def halted(self) -> np.ndarray:
        return ~self.exhausted


def _parallel_ranges(n: int, threads: int, run_range: Callable[[int, int], None]) -> None:
    """Split [0, n) into contiguous chunks and run them on a thread pool.

    Chunking cannot affect results: every trial writes only its own slot.
    """
    threads = max(1, min(int(threads), n))
    if threads == 1:
        run_range(0, n)
        return
    bounds = np.linspace(0, n, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run_range, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futures:
            f.result()


def _generic_metric_trial(rng, x0, a, b, m_halt, clip, max_shots, success_prob_fn):
    """Slow-path trial through the reference protocol, for probe overrides."""
    params = ProtocolParams(a=a, b=b, m_halt=m_halt, clip=clip, wrap=False)
    try:
        rec = run_to_halt(x0, params, success_prob_fn, rng, max_shots)
    except BudgetExhaustedError as exc:
        return exc.state.n, exc.state.x, 1.0, 0, True
    return rec.halt_time, rec.terminal_x, rec.terminal_infidelity, rec.failures, False


def _metric_batch(
    master_seed: int,
    kind: int,
    key1: int,
    key2: int,
    trials: int,
    init_halfwidth: float,
    a: float,
    b: float,
    m_halt: int,
    clip_halfwidth: float,
    wrap_halfperiod: float,
    max_shots: int,
    threads: int,
    success_prob_fn: Callable[[float], float] | None = None,
) -> TrialBatch:
    halt_time = np.empty(trials, dtype=np.int64)
    terminal_x = np.empty(trials, dtype=np.float64)
    terminal_eps = np.empty(trials, dtype=np.float64)
    failures = np.empty(trials, dtype=np.int64)
    exhausted = np.zeros(trials, dtype=np.bool_)
    kern = kernels.metric_trial

    def run_range(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            g = trial_stream(master_seed, kind, key1, key2, i)
            x0 = init_halfwidth * (2.0 * g.random() - 1.0)
            if success_prob_fn is None:
                t, x, f, ex = kern(g, x0, a, b, m_halt, clip_halfwidth, wrap_halfperiod, max_shots)
                eps = np.sin(0.5 * x) ** 2
            else:
                t, x, eps, f, ex = _generic_metric_trial(
                    g, x0, a, b, m_halt,
                    None if not math.isfinite(clip_halfwidth) else clip_halfwidth,
                    max_shots, success_prob_fn,
                )
            halt_time[i] = t
            terminal_x[i] = x
            terminal_eps[i] = eps
            failures[i] = f
            exhausted[i] = ex

    _parallel_ranges(trials, threads, run_range)
    return TrialBatch(halt_time, terminal_x, terminal_eps, failures, exhausted)


def _cell_from_batch(dataset: str, m: int, m_halt: int, trials: int, batch: TrialBatch) -> CellResult:
    ok = batch.halted
    n_halted = int(ok.sum())
    if n_halted == 0:
        raise RuntimeError(
            f"every trial of cell (m={m}, m_halt={m_halt}) hit the shot budget; "
            "raise max_shots"
        )
    t = batch.halt_time[ok].astype(float)
    x = batch.terminal_x[ok]
    eps = batch.terminal_eps[ok]
    err = x / m  # physical phase error; exact scaling for power-of-two depths
    nu, nu_se = mean_stderr(t)
    mean_eps, eps_se = mean_stderr(eps)
    return CellResult(
        dataset=dataset,
        m=m,
        m_halt=m_halt,
        trials=trials,
        nu=nu,
        nu_stderr=nu_se,
        r_total=m * nu,
        mean_eps=mean_eps,
        eps_stderr=eps_se,
        rmse_theta=rmse(err),
        rmse_stderr=rmse_stderr(err),
        exhausted=trials - n_halted,
    )


# --------------------------------------------------------------------------
# local fixed-depth dataset
# --------------------------------------------------------------------------

def local_batch(
    config: LocalConfig,
    m_halt: int,
    depth_key: int = 0,
    threads: int = 1,
    metric_success_prob: Callable[[float], float] | None = None,
) -> TrialBatch:
    """Metric-coordinate trials for one halting threshold of the local
    dataset. depth_key enters the stream derivation (0 = shared streams)."""
    return _metric_batch(
        config.master_seed, KIND_LOCAL, m_halt, depth_key,
        config.trials, config.init_halfwidth, config.a, config.b,
        m_halt, config.clip_halfwidth, math.inf, config.max_shots,
        threads, metric_success_prob,
    )


def local_batches(
    config: LocalConfig,
    threads: int = 1,
    metric_success_prob: Callable[[float], float] | None = None,
) -> dict[tuple[int, int], TrialBatch]:
    """All raw batches of the local grid, keyed by (m, m_halt).

    With share_streams every depth maps to the same batch object, so the
    whole grid costs one metric simulation per halting threshold.
    """
    out: dict[tuple[int, int], TrialBatch] = {}
    if config.share_streams:
        shared = {
            mh: local_batch(config, mh, 0, threads, metric_success_prob)
            for mh in config.halts
        }
        for m in config.depths:
            for mh in config.halts:
                out[(m, mh)] = shared[mh]
    else:
        for m in config.depths:
            for mh in config.halts:
                out[(m, mh)] = local_batch(config, mh, m, threads, metric_success_prob)
    return out


def cells_from_local_batches(
    config: LocalConfig, batches: dict[tuple[int, int], TrialBatch]
) -> list[CellResult]:
    return [
        _cell_from_batch("local", m, mh, config.trials, batches[(m, mh)])
        for m in config.depths
        for mh in config.halts
    ]


def run_local_fixed_depth(
    config: LocalConfig,
    threads: int = 1,
    metric_success_prob: Callable[[float], float] | None = None,
) -> list[CellResult]:
    """Run the local fixed-depth grid and aggregate every (m, m_halt) cell.

    metric_success_prob overrides the builtin cos^2(x/2) landscape (slow
    reference path; intended for stub probes in tests).
    """
    return cells_from_local_batches(config, local_batches(config, threads, metric_success_prob))


# --------------------------------------------------------------------------
# global single-scale dataset
# --------------------------------------------------------------------------

def global_batch(
    config: GlobalConfig,
    m_halt: int,
    threads: int = 1,
    success_prob: Callable[[float], float] | None = None,
) -> TrialBatch:
    """Trials for one halting threshold of the global dataset.

    The fast path simulates the metric coordinate x = m * delta with wrap
    half-period m * pi, which is the exact scaling of wrapping the physical
    mismatch to (-pi, pi]. terminal_x is metric in both paths. A success_prob
    override is evaluated on the *physical* mismatch and runs through the
    reference protocol (update amplitude a/m, principal-interval wrap).
    """
    m = config.depth
    if success_prob is None:
        return _metric_batch(
            config.master_seed, KIND_GLOBAL, m_halt, m,
            config.trials, m * config.init_halfwidth, config.a, config.b,
            m_halt, math.inf, m * math.pi, config.max_shots, threads,
        )

    halt_time = np.empty(config.trials, dtype=np.int64)
    terminal_x = np.empty(config.trials, dtype=np.float64)
    terminal_eps = np.empty(config.trials, dtype=np.float64)
    failures = np.empty(config.trials, dtype=np.int64)
    exhausted = np.zeros(config.trials, dtype=np.bool_)
    params = ProtocolParams(a=config.a / m, b=config.b, m_halt=m_halt, clip=None, wrap=True)

    def run_range(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            g = trial_stream(config.master_seed, KIND_GLOBAL, m_halt, m, i)
            delta0 = config.init_halfwidth * (2.0 * g.random() - 1.0)
            try:
                rec = run_to_halt(delta0, params, success_prob, g, config.max_shots)
                halt_time[i], terminal_x[i] = rec.halt_time, m * rec.terminal_x
                terminal_eps[i], failures[i] = rec.terminal_infidelity, rec.failures
            except BudgetExhaustedError as exc:
                halt_time[i], terminal_x[i] = exc.state.n, m * exc.state.x
                terminal_eps[i], failures[i] = 1.0, 0
                exhausted[i] = True

    _parallel_ranges(config.trials, threads, run_range)
    return TrialBatch(halt_time, terminal_x, terminal_eps, failures, exhausted)


def global_batches(
    config: GlobalConfig,
    threads: int = 1,
    success_prob: Callable[[float], float] | None = None,
) -> dict[int, TrialBatch]:
    return {mh: global_batch(config, mh, threads, success_prob) for mh in config.halts}


def cells_from_global_batches(
    config: GlobalConfig, batches: dict[int, TrialBatch]
) -> list[CellResult]:
    return [
        _cell_from_batch("global", config.depth, mh, config.trials, batches[mh])
        for mh in config.halts
    ]


def run_global_aliasing(
    config: GlobalConfig,
    threads: int = 1,
    success_prob: Callable[[float], float] | None = None,
) -> list[CellResult]:
    """Run the global single-scale dataset; rmse_theta is computed on the
    wrapped physical mismatch."""
    return cells_from_global_batches(config, global_batches(config, threads, success_prob))


# --------------------------------------------------------------------------
# multiscale cascade
# --------------------------------------------------------------------------

@dataclass
class MultiscaleBatch:
    """Per-trial, per-stage cascade outputs. exhausted_stage is the first
    stage that hit the budget (-1 when the whole cascade halted)."""

    halt_time: np.ndarray  # (trials, stages)
    terminal_x: np.ndarray  # (trials, stages)
    exhausted_stage: np.ndarray  # (trials,)


def multiscale_batch(config: MultiscaleConfig, threads: int = 1) -> MultiscaleBatch:
    """One pass over the deepest cascade; stage prefixes give every J."""
    n_stages = config.max_stage + 1
    halt_time = np.zeros((config.trials, n_stages), dtype=np.int64)
    terminal_x = np.zeros((config.trials, n_stages), dtype=np.float64)
    exhausted_stage = np.full(config.trials, -1, dtype=np.int64)
    kern = kernels.metric_trial
    a, b, mh = config.a, config.b, config.m_halt
    clip = config.clip_halfwidth

    def run_range(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            g = trial_stream(config.master_seed, KIND_MULTISCALE, 0, 0, i)
            x = config.init_halfwidth * (2.0 * g.random() - 1.0)
            for j in range(n_stages):
                t, x, f, ex = kern(g, x, a, b, mh, clip, math.inf, config.max_shots)
                if ex:
                    exhausted_stage[i] = j
                    break
                halt_time[i, j] = t
                terminal_x[i, j] = x
                # branch-resolved hand-off: depth doubles, mismatch re-centered
                x = min(max(2.0 * x, -clip), clip)

    _parallel_ranges(config.trials, threads, run_range)
    return MultiscaleBatch(halt_time, terminal_x, exhausted_stage)


def results_from_multiscale_batch(
    config: MultiscaleConfig, batch: MultiscaleBatch
) -> list[MultiscaleResult]:
    out = []
    depths = 2 ** np.arange(config.max_stage + 1, dtype=np.float64)
    for j_max in range(config.max_stage + 1):
        ok = (batch.exhausted_stage == -1) | (batch.exhausted_stage > j_max)
        n_halted = int(ok.sum())
        if n_halted == 0:
            raise RuntimeError(
                f"every cascade trial hit the shot budget by stage {j_max}; raise max_shots"
            )
        r_tot = batch.halt_time[ok, : j_max + 1].astype(float) @ depths[: j_max + 1]
        residual = batch.terminal_x[ok, j_max] / depths[j_max]
        r_mean, r_se = mean_stderr(r_tot)
        stages = tuple(
            StageStats(
                stage=j,
                depth=int(depths[j]),
                halt_mean=float(batch.halt_time[ok, j].mean()),
                resource_mean=float(depths[j] * batch.halt_time[ok, j].mean()),
            )
            for j in range(j_max + 1)
        )
        out.append(
            MultiscaleResult(
                stage_max=j_max,
                trials=config.trials,
                r_total_mean=r_mean,
                r_total_stderr=r_se,
                rmse_final=rmse(residual),
                rmse_stderr=rmse_stderr(residual),
                exhausted=config.trials - n_halted,
                stages=stages,
            )
        )
    return out


def run_multiscale(config: MultiscaleConfig, threads: int = 1) -> list[MultiscaleResult]:
    """Run the cascade and aggregate one MultiscaleResult per stage count."""
    return results_from_multiscale_batch(config, multiscale_batch(config, threads))


# --------------------------------------------------------------------------
# overlays, run-length sampling, summary fits
# --------------------------------------------------------------------------

def crb_overlay(m: int, nu: float) -> float:
    """Efficient-estimator scale 1/(m sqrt(nu)): the Cramer-Rao overlay for
    nu shots of Fisher information m^2 each."""
    if m < 1 or nu <= 0:
        raise ValueError(f"need m >= 1 and nu > 0, got m={m!r}, nu={nu!r}")
    return 1.0 / (m * math.sqrt(nu))


def sample_run_lengths(
    eps: float, n_samples: int, master_seed: int = DEFAULT_SEED, key: int = 0
) -> np.ndarray:
    """Monte Carlo streak lengths between failures at frozen infidelity eps."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"infidelity must lie in (0, 1], got {eps!r}")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    g = trial_stream(master_seed, KIND_RUNLENGTH, key, 0, 0)
    return kernels.run_lengths(g, eps, n_samples)


def _fit_or_none(x, y):
    """OLS fit, or None when the points cannot support one (degenerate grids
    in smoke runs)."""
    try:
        return ols_loglog(x, y)
    except ValueError:
        return None


def local_fits(cells: list[CellResult]) -> dict:
    """Scaling fits of the local grid.

    eps_vs_nu pools every cell (the metric data is depth-independent).
    rmse_theta_vs_r_total is fitted per depth -- the depth curves are
    parallel, and mixing them steepens a pooled fit toward the cross-depth
    slope of -1 -- with the pooled fit reported alongside for reference.
    """
    eps_fit = _fit_or_none([c.nu for c in cells], [c.mean_eps for c in cells])
    depths = sorted({c.m for c in cells})
    by_depth = {}
    for m in depths:
        sub = [c for c in cells if c.m == m]
        by_depth[str(m)] = _fit_or_none([c.r_total for c in sub], [c.rmse_theta for c in sub])
    pooled = _fit_or_none([c.r_total for c in cells], [c.rmse_theta for c in cells])
    gain = _fit_or_none(
        [c.m for c in cells],
        [math.sqrt(c.r_total) * c.rmse_theta for c in cells],
    )
    return {
        "eps_vs_nu": eps_fit,
        "rmse_theta_vs_r_total_by_depth": by_depth,
        "rmse_theta_vs_r_total_pooled": pooled,
        "sqrt_r_rmse_vs_depth": gain,
    }


def global_fits(cells: list[CellResult]) -> dict:
    """Scaling fits of the global dataset; the top-half RMSE fit quantifies
    the aliasing plateau."""
    r = [c.r_total for c in cells]
    top = sorted(cells, key=lambda c: c.m_halt)[len(cells) // 2:]
    return {
        "eps_vs_r_total": _fit_or_none(r, [c.mean_eps for c in cells]),
        "rmse_theta_vs_r_total": _fit_or_none(r, [c.rmse_theta for c in cells]),
        "rmse_theta_vs_r_total_top_half": _fit_or_none(
            [c.r_total for c in top], [c.rmse_theta for c in top]
        ),
    }


def multiscale_fits(results: list[MultiscaleResult]) -> dict:
    return {
        "rmse_final_vs_r_total": _fit_or_none(
            [r.r_total_mean for r in results], [r.rmse_final for r in results]
        )
    }
