import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from macfusion.asymptotics import (
    LargeSystemParams,
    alpha,
    chi2_upper_tail,
    default_gamma_grid,
    j_divergence,
    operating_point,
    optimal_diversity,
    pd0_at_pf0,
    pd0_ipc,
    pd0_tpc,
    pf0_ipc,
    pf0_tpc,
    poisson_tail_sum,
    roc_closed_form,
    threshold_for_pf0,
)
from macfusion.channel import PowerMode

SNR = 10**1.5


class TestPf0Ipc:
    @pytest.mark.parametrize("n", [1, 2, 7, 64])
    def test_zero_threshold(self, n):
        assert pf0_ipc(0.0, n) == 1.0

    def test_single_branch(self):
        assert pf0_ipc(math.log(2), 1) == pytest.approx(0.5, abs=1e-15)

    def test_two_branches(self):
        assert pf0_ipc(1.0, 2) == pytest.approx(3 * math.exp(-2), rel=1e-14)
        assert pf0_ipc(1.0, 2) == pytest.approx(0.406006, abs=5e-7)

    def test_cap(self):
        with pytest.raises(ValueError):
            pf0_ipc(1.0, 65)
        with pytest.raises(ValueError):
            pf0_ipc(1.0, 0)


class TestPd0Ipc:
    def test_diagonal(self):
        for g in np.linspace(0, 5, 21):
            assert pd0_ipc(g, 3, 0.3, 0.3) == pf0_ipc(g, 3)

    def test_scalar_substitution(self):
        # exp(-ln2 / 10) = 2 ** -0.1
        assert pd0_ipc(math.log(2), 1, 0.5, 0.05) == pytest.approx(2**-0.1, rel=1e-14)
        assert pd0_ipc(math.log(2), 1, 0.5, 0.05) == pytest.approx(0.9330329915368074, rel=1e-14)

    def test_tail_limit(self):
        assert pd0_ipc(1e4, 4, 0.5, 0.05) < 1e-300
        assert pd0_ipc(1e6, 4, 0.5, 0.05) == 0.0


class TestTpc:
    def test_alpha_f_fig_params(self):
        p = LargeSystemParams(0.5, 0.05, 1, SNR)
        assert p.alpha_f == pytest.approx(1.5811388300841898 / 2.5811388300841898, rel=1e-14)
        assert p.alpha_f == pytest.approx(0.612574, abs=5e-7)

    def test_zero_threshold(self):
        assert pf0_tpc(0.0, 3, 0.05, SNR) == 1.0
        assert pd0_tpc(0.0, 3, 0.5, 0.05, SNR) == 1.0

    def test_high_snr_limit(self):
        for g in (0.1, 0.5, 1.0, 2.0):
            for n in (1, 4):
                assert pf0_tpc(g, n, 0.05, 1e14) == pytest.approx(pf0_ipc(g, n), rel=1e-9)
                assert pd0_tpc(g, n, 0.5, 0.05, 1e14) == pytest.approx(pd0_ipc(g, n, 0.5, 0.05), rel=1e-9)

    def test_below_ipc_at_matched_pf0(self):
        for n in (1, 2, 4, 8, 16):
            p = LargeSystemParams(0.5, 0.05, n, SNR)
            for target in (1e-4, 1e-3, 0.01, 0.05, 0.2, 0.5):
                assert pd0_at_pf0(p, PowerMode.TPC, target) <= pd0_at_pf0(p, PowerMode.IPC, target)


class TestAlpha:
    def test_below_one_when_pd_above_pf(self):
        for snr in (0.1, 1.0, SNR, 1e4):
            for n in (1, 2, 8, 64):
                assert LargeSystemParams(0.5, 0.05, n, snr).reduction_factor < 1

    def test_increasing_in_snr(self):
        vals = [LargeSystemParams(0.5, 0.05, 2, s).reduction_factor for s in np.logspace(-2, 4, 40)]
        assert np.all(np.diff(vals) > 0)

    def test_decreasing_in_n(self):
        vals = [LargeSystemParams(0.5, 0.05, n, SNR).reduction_factor for n in range(1, 65)]
        assert np.all(np.diff(vals) < 0)

    def test_formula(self):
        assert alpha(0.5, 2.0, 3) == pytest.approx(0.25)


class TestChi2Tail:
    def test_examples(self):
        assert chi2_upper_tail(0.0, 6) == 1.0
        assert chi2_upper_tail(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-15)
        assert chi2_upper_tail(4.0, 4) == pytest.approx(3 * math.exp(-2), rel=1e-14)

    def test_rejects_odd_dof(self):
        with pytest.raises(ValueError):
            chi2_upper_tail(1.0, 3)

    @given(st.floats(0.0, 300.0), st.integers(1, 40))
    @settings(max_examples=200, deadline=None)
    def test_matches_scipy(self, x, n):
        ref = stats.chi2.sf(x, 2 * n)
        assert chi2_upper_tail(x, 2 * n) == pytest.approx(ref, rel=1e-10, abs=1e-300)

    def test_oracle_identity(self):
        for n in range(1, 17):
            for g in np.linspace(0.0, 50.0, 501):
                assert abs(pf0_ipc(g, n) - chi2_upper_tail(2 * g * n, 2 * n)) <= 1e-12
                assert abs(pd0_ipc(g, n, 0.5, 0.05) - chi2_upper_tail(2 * g * n * 0.1, 2 * n)) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 5, 16, 64])
    def test_poisson_sum_monotone(self, n):
        m = np.concatenate([np.linspace(0, 1e-6, 200), np.linspace(n * (1 - 1e-9), n * (1 + 1e-9), 400), np.linspace(0, 4 * n + 800, 3000)])
        v = np.array([poisson_tail_sum(x, n) for x in np.sort(m)])
        assert np.all(np.diff(v) <= 0)
        np.testing.assert_allclose(v, stats.poisson.cdf(n - 1, np.sort(m)), rtol=0, atol=1e-14)

    def test_poisson_sum_no_overflow(self):
        assert 0.0 <= poisson_tail_sum(900.0, 64) <= 1.0
        assert poisson_tail_sum(900.0, 64) == pytest.approx(stats.poisson.cdf(63, 900.0), abs=1e-300)


class TestShape:
    @pytest.mark.parametrize("mode", [PowerMode.IPC, PowerMode.TPC])
    @pytest.mark.parametrize("n", [1, 2, 8])
    def test_bounded_and_monotone(self, mode, n):
        p = LargeSystemParams(0.5, 0.05, n, SNR)
        curve = roc_closed_form(p, mode, np.linspace(0, 20, 400))
        assert np.all((curve.pf0 >= 0) & (curve.pf0 <= 1) & (curve.pd0 >= 0) & (curve.pd0 <= 1))
        assert np.all(np.diff(curve.pf0) <= 0) and np.all(np.diff(curve.pd0) <= 0)

    @pytest.mark.parametrize("n", [1, 3, 8])
    def test_ipc_above_diagonal(self, n):
        curve = roc_closed_form(LargeSystemParams(0.5, 0.05, n), PowerMode.IPC, np.linspace(0, 10, 300))
        assert np.all(curve.pd0 >= curve.pf0)

    def test_diagonal_when_uninformative(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = LargeSystemParams(0.3, 0.3, 2)
        curve = roc_closed_form(p, PowerMode.IPC, np.linspace(0, 5, 50))
        np.testing.assert_array_equal(curve.pf0, curve.pd0)

    def test_warns_on_faulty(self):
        with pytest.warns(UserWarning):
            LargeSystemParams(0.2, 0.3)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            roc_closed_form(LargeSystemParams(0.5, 0.05), PowerMode.IPC, [1.0, 0.5])
        with pytest.raises(ValueError):
            operating_point(LargeSystemParams(0.5, 0.05), PowerMode.RAW, 1.0)

    def test_default_grid_reaches_small_pf0(self):
        p = LargeSystemParams(0.5, 0.05, 2)
        g = default_gamma_grid(p, PowerMode.TPC)
        assert g[0] == 0.0
        assert operating_point(p, PowerMode.TPC, g[-1])[0] == pytest.approx(1e-6, abs=1e-12)


class TestThresholdInversion:
    @pytest.mark.parametrize("mode", [PowerMode.IPC, PowerMode.TPC])
    def test_round_trip(self, mode):
        for n in (1, 2, 5, 16):
            p = LargeSystemParams(0.5, 0.05, n, SNR)
            for target in (1e-6, 1e-3, 0.05, 0.5, 0.99):
                g = threshold_for_pf0(p, mode, target)
                assert abs(operating_point(p, mode, g)[0] - target) <= 1e-12

    def test_full_rate(self):
        assert threshold_for_pf0(LargeSystemParams(0.5, 0.05), PowerMode.IPC, 1.0) == 0.0

    def test_ipc_increases_with_diversity(self):
        vals = [pd0_at_pf0(LargeSystemParams(0.5, 0.05, n), PowerMode.IPC, 0.05) for n in (1, 2, 4, 8)]
        assert np.all(np.diff(vals) > 0)

    def test_tpc_interior_optimum(self):
        best, vals = optimal_diversity(0.5, 0.05, SNR, 0.05)
        assert 1 < best < 16
        assert vals[best - 1] == max(vals)
        assert vals[0] < vals[best - 1] and vals[-1] < vals[best - 1]


class TestJDivergence:
    def test_ipc_value(self):
        assert abs(j_divergence(LargeSystemParams(0.5, 0.05), PowerMode.IPC) - 8.1) <= 1e-12

    def test_zero_when_uninformative(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = LargeSystemParams(0.4, 0.4, 3)
        assert j_divergence(p, PowerMode.IPC) == 0.0
        assert j_divergence(p, PowerMode.TPC) == pytest.approx(0.0, abs=1e-15)

    def test_ipc_linear_in_n(self):
        base = j_divergence(LargeSystemParams(0.5, 0.05, 1), PowerMode.IPC)
        for n in (2, 5, 16):
            assert j_divergence(LargeSystemParams(0.5, 0.05, n), PowerMode.IPC) == pytest.approx(n * base, rel=1e-14)

    def test_tpc_below_ipc(self):
        for n in (1, 4, 16):
            p = LargeSystemParams(0.5, 0.05, n, SNR)
            assert j_divergence(p, PowerMode.TPC) < j_divergence(p, PowerMode.IPC)
