"""Unit tests of the run-length certificate calculus and Fisher identities."""

import math

import mpmath as mp
import numpy as np
import pytest

from phaselock.certificates import (
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
from phaselock.probes import NoonProbe

mp.mp.dps = 40


def oracle_cert_scale(m_halt, eta):
    """Arbitrary-precision 1 - eta^(1/m_halt)."""
    return 1 - mp.e ** (mp.log(mp.mpf(eta)) / m_halt)


class TestRunProbability:
    def test_zero_infidelity(self):
        assert run_probability(0.0, 17) == 1.0

    def test_fair_coin_cubed(self):
        assert run_probability(0.5, 3) == 0.125

    def test_certain_failure(self):
        assert run_probability(1.0, 1) == 0.0

    def test_monotone_decreasing_in_eps(self):
        values = [run_probability(e, 25) for e in np.linspace(0, 1, 200)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_eps_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError):
            run_probability(-0.1, 3)
        with pytest.raises(ValueError):
            run_probability(1.1, 3)


class TestNullBound:
    def test_supremum_attained_at_threshold(self):
        # sup over eps >= eps0 of the run probability sits at eps0
        for eps0 in np.linspace(0.01, 0.99, 20):
            bound = null_bound(eps0, 12)
            grid = np.linspace(eps0, 1.0, 200)
            assert all(run_probability(e, 12) <= bound + 1e-15 for e in grid)

    def test_values_match_run_probability(self):
        assert null_bound(0.5, 3) == 0.125
        assert null_bound(0.0, 40) == 1.0


class TestCertScale:
    def test_single_shot(self):
        assert cert_scale(1, 0.1) == pytest.approx(0.9, rel=1e-15)

    def test_no_evidence_demanded(self):
        assert cert_scale(123, 1.0) == 0.0

    def test_frozen_reference_value(self):
        assert cert_scale(20, 0.05) == pytest.approx(0.139096, abs=1e-6)

    def test_against_arbitrary_precision_oracle(self):
        for m_halt in (1, 2, 5, 20, 320, 1000, 10_000):
            for eta in (0.1, 0.05, 0.01):
                want = float(oracle_cert_scale(m_halt, eta))
                assert cert_scale(m_halt, eta) == pytest.approx(want, rel=1e-13)

    def test_strictly_decreasing_in_m_halt(self):
        values = [cert_scale(mh, 0.05) for mh in range(1, 500)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_decreasing_toward_loose_significance(self):
        etas = np.linspace(0.01, 1.0, 50)
        values = [cert_scale(40, e) for e in etas]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("eta", [0.0, -0.5, 1.5])
    def test_invalid_significance_rejected(self, eta):
        with pytest.raises(ValueError):
            cert_scale(10, eta)

    def test_invalid_m_halt_rejected(self):
        with pytest.raises(ValueError):
            cert_scale(0, 0.1)


class TestCertScaleAsymptotic:
    def test_reference_value(self):
        want = math.log(20.0) / 320.0
        got = cert_scale_asymptotic(320, 0.05)
        assert got == pytest.approx(want, rel=1e-15)
        assert got == pytest.approx(0.0093617, abs=1e-7)

    def test_unit_scale(self):
        assert cert_scale_asymptotic(1, math.exp(-1)) == pytest.approx(1.0, rel=1e-15)

    def test_sandwich_bound(self):
        # c - c^2/2 <= exact <= c with c = ln(1/eta)/m_halt
        for eta in (0.1, 0.05, 0.01, 0.5):
            for m_halt in range(1, 2000, 13):
                c = cert_scale_asymptotic(m_halt, eta)
                exact = cert_scale(m_halt, eta)
                assert c - c * c / 2 <= exact <= c


class TestParamCertificate:
    def test_frozen_reference_value(self):
        got = param_certificate(320, 0.05, 64.0)
        want = float(2 / mp.sqrt(64) * mp.sqrt(oracle_cert_scale(320, 0.05)))
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(0.024132, abs=1e-6)

    def test_no_evidence_demanded(self):
        assert param_certificate(77, 1.0, 9.0) == 0.0

    def test_inverse_sqrt_fisher_scaling(self):
        for m in (1, 2, 8):
            wide = param_certificate(40, 0.05, float(m * m))
            tight = param_certificate(40, 0.05, 4.0 * m * m)
            assert tight == pytest.approx(wide / 2, rel=1e-14)

    def test_invalid_fisher_rejected(self):
        with pytest.raises(ValueError):
            param_certificate(10, 0.1, 0.0)


class TestCertificateBundle:
    def test_fields(self):
        cert = certificate(320, 0.05, f_q=64.0)
        assert cert.m_halt == 320 and cert.significance == 0.05
        assert cert.eps_cert == cert_scale(320, 0.05)
        assert cert.param_cert == param_certificate(320, 0.05, 64.0)

    def test_param_absent_without_fisher(self):
        assert certificate(10, 0.1).param_cert is None


class TestMonitoredProxies:
    def test_infidelity_values(self):
        assert monitored_infidelity(0) == 1.0
        assert monitored_infidelity(9) == pytest.approx(0.1, rel=1e-15)

    def test_proxy_inverts_mean_run_length(self):
        for eps in np.linspace(0.01, 1.0, 40):
            assert monitored_infidelity(expected_run_length(eps)) == pytest.approx(eps, rel=1e-12)

    def test_param_values(self):
        assert monitored_param(0, 4.0) == 1.0
        assert monitored_param(3, 1.0) == pytest.approx(1.0, rel=1e-15)
        assert monitored_param(99, 64.0) == pytest.approx(0.025, rel=1e-15)

    def test_negative_streak_rejected(self):
        with pytest.raises(ValueError):
            monitored_infidelity(-1)
        with pytest.raises(ValueError):
            monitored_param(-1, 4.0)


class TestExpectedRunLength:
    def test_fair_coin(self):
        assert expected_run_length(0.5) == 1.0

    def test_certain_failure(self):
        assert expected_run_length(1.0) == 0.0

    def test_reference_value(self):
        assert expected_run_length(0.1) == pytest.approx(9.0, rel=1e-14)

    def test_against_geometric_sampling_oracle(self):
        # independent oracle: numpy's geometric sampler counts trials to the
        # first failure, so the streak length is that count minus one
        rng = np.random.default_rng(20260809)
        draws = rng.geometric(p=0.1, size=1_000_000) - 1
        stderr = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - expected_run_length(0.1)) <= 4 * stderr

    def test_zero_infidelity_rejected(self):
        with pytest.raises(ValueError):
            expected_run_length(0.0)


class TestClassicalFisher:
    def test_plain_arithmetic(self):
        assert classical_fisher(0.5, 0.25) == pytest.approx(0.25, rel=1e-15)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_degenerate_rejected(self, p):
        with pytest.raises(ValueError):
            classical_fisher(p, 0.1)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            classical_fisher(1.2, 0.1)

    def test_entangled_fringe_information_is_constant(self):
        # dp^2/(p(1-p)) = m^2 identically away from the degenerate points,
        # because sin^2(m d) = 4 p (1-p)
        deltas = np.geomspace(1e-3, 1.0, 57)
        for m in (1, 2, 4, 8):
            probe = NoonProbe(m)
            for d in deltas:
                p = float(probe.success_prob(d))
                if min(p, 1 - p) < 1e-12:
                    continue
                i_cl = classical_fisher(p, float(probe.success_prob_derivative(d)))
                assert i_cl == pytest.approx(m * m, rel=1e-10)


class TestFisherMatchingCurve:
    def test_depth_two_rows_match_qfi(self):
        table = fisher_matching_curve(NoonProbe(2), [1e-3, 1e-2, 1e-1])
        np.testing.assert_allclose(table[:, 1], 4.0, rtol=1e-4)
        assert np.all(table[:, 2] == 4.0)

    def test_zero_row_uses_local_limit(self):
        table = fisher_matching_curve(NoonProbe(3), [0.0])
        assert table[0, 1] == 9.0

    def test_product_probe_grid_is_unity(self):
        table = fisher_matching_curve(NoonProbe(1), np.linspace(0.05, 3.0, 40))
        np.testing.assert_allclose(table[:, 1], 1.0, rtol=1e-10)

    def test_finite_difference_matches_within_stated_tolerance(self):
        deltas = np.geomspace(1e-3, 1.0, 31)
        probe = NoonProbe(4)
        table = fisher_matching_curve(probe, deltas, method="fd")
        p = probe.success_prob(deltas)
        keep = np.minimum(p, 1 - p) > 1e-6
        np.testing.assert_allclose(table[keep, 1], 16.0, rtol=1e-4)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            fisher_matching_curve(NoonProbe(1), [0.1], method="spline")


class TestRunSoundness:
    def test_streak_frequency_below_significance(self):
        # whenever (1-eps0)^m_halt <= eta, the Monte Carlo frequency of a full
        # streak at frozen eps >= eps0 stays below eta (worst case at eps0)
        rng = np.random.default_rng(42)
        n = 20_000
        for m_halt, eta in ((20, 0.05), (80, 0.1), (5, 0.01)):
            eps0 = cert_scale(m_halt, eta)
            assert run_probability(eps0, m_halt) <= eta + 1e-12
            wins = (rng.random((n, m_halt)) < 1.0 - eps0).all(axis=1)
            freq = wins.mean()
            assert freq <= eta + 3 * math.sqrt(eta * (1 - eta) / n)
