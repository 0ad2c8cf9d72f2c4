import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpcn import analytic, optimize
from wpcn.errors import DomainError, HighSnrFormulaInvalid
from wpcn.model import SystemParams
from wpcn.optimize import TauSolution

# 1 / (1 + W0(5 e^{2 psi(1) - 1})), mpmath at 25 digits
TAU_TOLERANT_N1 = 0.7184634665899986233


def brute_force_tau(objective, step=1e-4):
    grid = np.arange(step, 1.0, step)
    vals = [objective(t) for t in grid]
    return float(grid[int(np.argmax(vals))])


def bisect_w(x):
    lo, hi = -1.0, max(1.0, math.log1p(x))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) > x:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestLimitedClosedForm:
    def test_constants(self):
        a, b = optimize._limited_constants(SystemParams(), analytic.DEFAULT_APPROX)
        assert a == pytest.approx(3.6467, rel=1e-15)
        assert b == pytest.approx(2 * 1.6467 / 1.5709 * math.sqrt(3 / 5), rel=1e-14)

    def test_vanishes_at_high_power(self):
        taus = [optimize.optimal_tau_limited_highsnr(SystemParams(tx_power_dbm=p)).tau
                for p in (40, 60, 80, 120, 200)]
        assert all(b < a for a, b in zip(taus, taus[1:]))
        assert taus[-1] < 1e-4

    def test_matches_brute_force_n2(self):
        p = SystemParams(n_antennas=2, tx_power_dbm=40.0)
        ref = brute_force_tau(lambda t: analytic.throughput_delay_limited(p.replace(tau=t)))
        assert abs(optimize.optimal_tau_limited_highsnr(p).tau - ref) <= 0.02

    def test_stationarity_residual(self):
        sol = optimize.optimal_tau_limited_highsnr(SystemParams(n_antennas=5, tx_power_dbm=40.0))
        assert sol.residual < 1e-9
        assert sol.method == "closed_form_limited"
        assert sol.objective_value == pytest.approx(
            analytic.throughput_delay_limited(SystemParams(n_antennas=5, tx_power_dbm=40.0,
                                                           tau=sol.tau)), rel=1e-15)

    def test_converges_to_approx_optimum(self):
        # the closed form targets the maximum of the incomplete-gamma throughput
        p = SystemParams(n_antennas=2, tx_power_dbm=60.0)
        ref = optimize.maximize_on_unit_interval(
            lambda t: analytic.throughput_delay_limited_approx(p.replace(tau=t)), 1e-6)[0]
        assert optimize.optimal_tau_limited_highsnr(p).tau == pytest.approx(ref, abs=2e-3)

    @pytest.mark.parametrize("n, p_dbm", [(1, 25.0), (1, 30.0), (2, 25.0)])
    def test_invalid_at_low_snr(self, n, p_dbm):
        with pytest.raises(HighSnrFormulaInvalid, match="high-SNR formula invalid at this SNR.*use search"):
            optimize.optimal_tau_limited_highsnr(SystemParams(n_antennas=n, tx_power_dbm=p_dbm))

    def test_needs_positive_rate(self):
        with pytest.raises(DomainError):
            optimize.optimal_tau_limited_highsnr(SystemParams(rate=0.0))

    def test_ignores_tau_field(self):
        a = optimize.optimal_tau_limited_highsnr(SystemParams(tx_power_dbm=40.0, tau=0.1))
        b = optimize.optimal_tau_limited_highsnr(SystemParams(tx_power_dbm=40.0, tau=0.9))
        assert a.tau == b.tau


class TestTolerantClosedForm:
    def test_half_when_argument_is_e(self):
        # gamma_bar * omega^2 * e^{2 psi(1) - 1} = e  <=>  gamma_bar omega^2 = e^{2 + 2 gamma}
        g = math.exp(2.0 + 2.0 * 0.57721566490153286061)
        p_dbm = 30.0 + 10.0 * math.log10(g / 5.0)
        sol = optimize.optimal_tau_tolerant_highsnr(SystemParams(n_antennas=1, tx_power_dbm=p_dbm))
        assert sol.tau == pytest.approx(0.5, rel=1e-13)

    def test_frozen_n1(self):
        sol = optimize.optimal_tau_tolerant_highsnr(SystemParams(n_antennas=1))
        assert sol.tau == pytest.approx(TAU_TOLERANT_N1, rel=1e-14)

    def test_bisection_oracle(self):
        x = 5.0 * math.exp(2 * -0.57721566490153286061 - 1)
        sol = optimize.optimal_tau_tolerant_highsnr(SystemParams(n_antennas=1))
        assert sol.tau == pytest.approx(1 / (1 + bisect_w(x)), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    @pytest.mark.parametrize("p_dbm", [20.0, 30.0, 45.0])
    def test_stationary_point_of_asymptote(self, n, p_dbm):
        p = SystemParams(n_antennas=n, tx_power_dbm=p_dbm)
        tau = optimize.optimal_tau_tolerant_highsnr(p).tau
        f = lambda t: analytic.throughput_delay_tolerant_asymptotic(p.replace(tau=t))
        h = 1e-6
        assert abs((f(tau + h) - f(tau - h)) / (2 * h)) < 1e-6

    @pytest.mark.filterwarnings("ignore::wpcn.errors.LowSnrWarning")
    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    def test_search_on_asymptote_agrees(self, n):
        p = SystemParams(n_antennas=n, tx_power_dbm=35.0)
        tol = 1e-4
        tau, _, _ = optimize.maximize_on_unit_interval(
            lambda t: analytic.throughput_delay_tolerant_asymptotic(p.replace(tau=t)), tol)
        assert abs(tau - optimize.optimal_tau_tolerant_highsnr(p).tau) <= tol

    def test_decreasing_in_power(self):
        taus = [optimize.optimal_tau_tolerant_highsnr(SystemParams(tx_power_dbm=p)).tau
                for p in range(10, 80, 5)]
        assert all(b < a for a, b in zip(taus, taus[1:]))


class TestSearch:
    @pytest.mark.parametrize("mode", analytic.MODES)
    @pytest.mark.parametrize("n", [1, 5])
    def test_local_optimality(self, mode, n):
        p = SystemParams(n_antennas=n, tx_power_dbm=35.0)
        tol = 1e-4
        sol = optimize.optimal_tau_search(mode, p, tol)
        f = (analytic.throughput_delay_limited if mode == "delay_limited"
             else lambda q: analytic.throughput_delay_tolerant(q, optimize.SEARCH_QUADRATURE))
        assert 0 < sol.tau < 1
        assert sol.objective_value >= f(p.replace(tau=sol.tau - tol))
        assert sol.objective_value >= f(p.replace(tau=sol.tau + tol))
        assert not sol.degenerate

    def test_n5_limited_agrees_with_closed_form(self):
        p = SystemParams(n_antennas=5, tx_power_dbm=40.0)
        gap = abs(optimize.optimal_tau_search("delay_limited", p).tau
                  - optimize.optimal_tau_limited_highsnr(p).tau)
        assert gap <= 0.02

    def test_matches_brute_force(self):
        p = SystemParams(n_antennas=2, tx_power_dbm=30.0)
        ref = brute_force_tau(lambda t: analytic.throughput_delay_limited(p.replace(tau=t)))
        assert optimize.optimal_tau_search("delay_limited", p).tau == pytest.approx(ref, abs=2e-4)

    def test_flat_objective(self):
        sol = optimize.optimal_tau_search("delay_limited", SystemParams(rate=0.0))
        assert sol.degenerate and sol.tau == 0.5 and sol.objective_value == 0.0

    @pytest.mark.parametrize("tol", [1e-8, 1e-2, 0.0])
    def test_tol_range(self, tol):
        with pytest.raises(DomainError):
            optimize.optimal_tau_search("delay_limited", SystemParams(), tol)

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            optimize.optimal_tau_search("bursty", SystemParams())

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.005, 0.995))
    def test_finds_parabola_peak(self, peak):
        tau, val, _ = optimize.maximize_on_unit_interval(lambda t: -(t - peak) ** 2, 1e-6)
        assert abs(tau - peak) <= 1e-6

    def test_golden_section(self):
        x, fx = optimize.golden_section_max(lambda t: math.sin(t), 0.0, 3.0, 1e-9)
        # a quadratic peak is only resolvable to about sqrt(machine epsilon)
        assert x == pytest.approx(math.pi / 2, abs=1e-7)
        assert fx == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.floats(35.0, 90.0))
def test_closed_forms_in_unit_interval(n, p_dbm):
    p = SystemParams(n_antennas=n, tx_power_dbm=p_dbm)
    assert 0 < optimize.optimal_tau_tolerant_highsnr(p).tau < 1
    try:
        assert 0 < optimize.optimal_tau_limited_highsnr(p).tau < 1
    except HighSnrFormulaInvalid:
        pass


def test_solution_validation():
    with pytest.raises(DomainError):
        TauSolution(1.0, 0.0, "search")
    with pytest.raises(DomainError):
        TauSolution(0.5, 0.0, "guess")
