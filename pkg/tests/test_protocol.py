"""Unit tests of the one-bit controller state machine."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from phaselock.probes import metric_success_prob
from phaselock.protocol import (
    BudgetExhaustedError,
    ControllerState,
    ProtocolParams,
    run_to_halt,
    step,
    step_size,
)
from phaselock.rng import KIND_PROTOCOL, trial_stream

DATA = Path(__file__).parent / "data"


def make_params(**kw):
    base = dict(a=0.3, b=0.5, m_halt=20, clip=math.pi / 2, wrap=False)
    base.update(kw)
    return ProtocolParams(**base)


class TestStepSize:
    def test_streak_zero_returns_amplitude(self):
        assert step_size(make_params(a=0.3, b=0.5), 0) == 0.3

    def test_inverse_sqrt_decay(self):
        assert step_size(make_params(a=0.3, b=0.5), 3) == pytest.approx(0.15, rel=1e-15)

    def test_zero_exponent_is_flat(self):
        assert step_size(make_params(a=1.0, b=0.0), 100) == 1.0

    def test_positive_and_nonincreasing(self):
        params = make_params(a=0.7, b=0.3)
        values = [step_size(params, k) for k in range(200)]
        assert all(v > 0 for v in values)
        assert all(v1 >= v2 for v1, v2 in zip(values, values[1:]))

    def test_negative_streak_rejected(self):
        with pytest.raises(ValueError):
            step_size(make_params(), -1)


class TestParamsValidation:
    @pytest.mark.parametrize(
        "kw",
        [dict(a=0.0), dict(a=-1.0), dict(b=-0.1), dict(m_halt=0), dict(m_halt=2.5), dict(clip=-0.1)],
    )
    def test_invalid_rejected(self, kw):
        with pytest.raises(ValueError):
            make_params(**kw)

    def test_zero_clip_allowed(self):
        # pins the control at the origin; used for frozen-control statistics
        assert make_params(clip=0.0).clip == 0.0


class TestStep:
    def test_certain_success_freezes_control(self):
        g = trial_stream(7, KIND_PROTOCOL, 0, 0, 1)
        state = ControllerState(0.37)
        for n in range(1, 30):
            state, outcome = step(state, make_params(), lambda x: 1.0, g)
            assert outcome.success and outcome.step_applied == 0.0
            assert state.x == 0.37
            assert state.m_s == n and state.n == n

    def test_certain_failure_resets_and_bounds_step(self):
        g = trial_stream(7, KIND_PROTOCOL, 0, 0, 2)
        params = make_params(a=0.3, b=0.5, clip=None)
        state = ControllerState(0.1, m_s=5, n=9)
        state, outcome = step(state, params, lambda x: 0.0, g)
        assert not outcome.success
        assert state.m_s == 0 and state.n == 10
        assert abs(outcome.step_applied) <= 0.3 * 6.0 ** -0.5
        assert state.x == 0.1 + outcome.step_applied

    def test_clip_bounds_control(self):
        g = trial_stream(7, KIND_PROTOCOL, 0, 0, 3)
        params = make_params(a=5.0, b=0.0, clip=0.5)
        state = ControllerState(0.49)
        for _ in range(50):
            state, _ = step(state, params, lambda x: 0.0, g)
            assert -0.5 <= state.x <= 0.5

    def test_wrap_reduces_to_principal_interval(self):
        g = trial_stream(7, KIND_PROTOCOL, 0, 0, 4)
        params = make_params(a=1e-9, b=0.0, clip=None, wrap=True)
        state, _ = step(ControllerState(3.2), params, lambda x: 0.0, g)
        assert state.x == pytest.approx(3.2 - 2 * math.pi, abs=1e-8)

    @pytest.mark.parametrize("bad_p", [-0.1, 1.5, float("nan")])
    def test_probability_out_of_range_rejected(self, bad_p):
        g = trial_stream(7, KIND_PROTOCOL, 0, 0, 5)
        with pytest.raises(ValueError):
            step(ControllerState(0.0), make_params(), lambda x: bad_p, g)

    def test_counter_bookkeeping_over_random_run(self):
        g = trial_stream(11, KIND_PROTOCOL, 0, 0, 6)
        params = make_params(m_halt=10 ** 9)  # never halts in this window
        state = ControllerState(0.8)
        successes = failures = 0
        prev = state
        for _ in range(3000):
            state, outcome = step(state, params, metric_success_prob, g)
            if outcome.success:
                successes += 1
                assert state.m_s == prev.m_s + 1
                assert state.x == prev.x
            else:
                failures += 1
                assert state.m_s == 0
            assert state.n == prev.n + 1
            assert state.m_s <= state.n
            prev = state
        assert successes + failures == 3000


class TestRunToHalt:
    def test_certain_success_halts_at_threshold(self):
        g = trial_stream(3, KIND_PROTOCOL, 0, 0, 7)
        rec = run_to_halt(0.2, make_params(m_halt=20), lambda x: 1.0, g)
        assert rec.halt_time == 20
        assert rec.terminal_infidelity == 0.0
        assert rec.failures == 0
        assert rec.terminal_x == 0.2

    def test_halt_time_at_least_threshold_and_tail_frozen(self):
        params = make_params(m_halt=12)
        g = trial_stream(3, KIND_PROTOCOL, 0, 0, 8)
        # replay manually to observe the terminal streak
        state = ControllerState(0.9)
        outcomes = []
        xs = []
        while state.m_s < params.m_halt:
            state, outcome = step(state, params, metric_success_prob, g)
            outcomes.append(outcome.success)
            xs.append(state.x)
        assert len(outcomes) >= params.m_halt
        assert all(outcomes[-params.m_halt:])
        assert len(set(xs[-params.m_halt:])) == 1  # control frozen over the streak

    def test_frozen_half_success_mean_halt_time(self):
        # independent oracle: absorbing chain over streak states,
        # E_i = 1 + p E_{i+1} + (1-p) E_0, E_k = 0
        def chain_mean(p, k):
            coeff = np.zeros((k, k))
            rhs = np.full(k, 1.0)
            for i in range(k):
                coeff[i, i] = -1.0
                coeff[i, 0] += 1.0 - p
                if i + 1 < k:
                    coeff[i, i + 1] += p
            return -np.linalg.solve(coeff, rhs)[0]

        oracle = chain_mean(0.5, 3)
        assert oracle == pytest.approx(14.0, rel=1e-12)

        params = make_params(m_halt=3, clip=0.0)
        totals = []
        for i in range(20_000):
            g = trial_stream(5, KIND_PROTOCOL, 3, 0, i)
            totals.append(run_to_halt(0.0, params, lambda x: 0.5, g).halt_time)
        mean = np.mean(totals)
        stderr = np.std(totals, ddof=1) / math.sqrt(len(totals))
        assert abs(mean - oracle) <= 4 * stderr

    def test_budget_exhaustion_raises_with_state(self):
        g = trial_stream(3, KIND_PROTOCOL, 0, 0, 9)
        with pytest.raises(BudgetExhaustedError) as err:
            run_to_halt(0.0, make_params(m_halt=5), lambda x: 0.0, g, max_shots=50)
        assert err.value.state.n == 50
        assert err.value.max_shots == 50

    def test_budget_below_threshold_rejected(self):
        g = trial_stream(3, KIND_PROTOCOL, 0, 0, 10)
        with pytest.raises(ValueError):
            run_to_halt(0.0, make_params(m_halt=30), lambda x: 1.0, g, max_shots=10)


class TestGoldenTrajectory:
    """Replay against the frozen record produced by tests/data/make_golden_trajectory.py
    (an independent inline implementation of the same update rule)."""

    def test_step_matches_golden_record(self):
        golden = json.loads((DATA / "golden_trajectory.json").read_text())
        params = ProtocolParams(**golden["params"])
        g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(tuple(golden["stream"]))))
        state = ControllerState(golden["x0"])
        for shot in golden["shots"]:
            state, outcome = step(state, params, metric_success_prob, g)
            assert outcome.success == shot["success"]
            assert outcome.step_applied == shot["step_applied"]
            assert state.x == shot["x"]
            assert state.m_s == shot["m_s"]
        record = golden["record"]
        assert state.n == record["halt_time"]
        assert state.m_s == params.m_halt
        assert state.x == record["terminal_x"]

    def test_run_to_halt_matches_golden_record(self):
        golden = json.loads((DATA / "golden_trajectory.json").read_text())
        params = ProtocolParams(**golden["params"])
        g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(tuple(golden["stream"]))))
        rec = run_to_halt(golden["x0"], params, metric_success_prob, g)
        expected = golden["record"]
        assert rec.halt_time == expected["halt_time"]
        assert rec.terminal_x == expected["terminal_x"]
        assert rec.failures == expected["failures"]
        assert rec.terminal_infidelity == pytest.approx(expected["terminal_infidelity"], abs=1e-15)
