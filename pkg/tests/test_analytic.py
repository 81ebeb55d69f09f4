import math
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np
import pytest
from scipy import special

from spinbath.analytic import (
    X_SWITCH,
    band_average,
    hyp1f2_special,
    kappa_model1_adiabatic,
    kappa_model1_exact,
    kappa_model1_limit,
    kappa_model1_ring,
    kappa_model2_edge_integral,
    kappa_model2_finiteN,
    kappa_model2_integral,
    model2_decay_rate,
)
from spinbath.core import ConfigError
from spinbath.freefermion import kappa_reduced, open_chain_modes
from spinbath.schema import ChainSpec, ModelKind, SeriesMethod


class TestModel1:
    def test_exact_solution_period(self):
        # J = V = 1: Omega = sqrt(2), full return every pi / sqrt(2)
        t = np.array([0.0, math.pi / math.sqrt(2.0), 2.0 * math.pi / math.sqrt(2.0)])
        np.testing.assert_allclose(kappa_model1_exact(1.0, 1.0, t), 1.0, atol=1e-14)
        assert kappa_model1_exact(1.0, 1.0, math.pi / (2.0 * math.sqrt(2.0))) == pytest.approx(0.0, abs=1e-14)

    def test_exact_solution_range(self):
        t = np.linspace(0.0, 10.0, 1001)
        values = kappa_model1_exact(2.0, 1.0, t)
        assert np.all(values <= 1.0) and np.all(values >= -1.0)

    @pytest.mark.parametrize("m", range(0, 7))
    def test_limit_revivals(self, m):
        assert kappa_model1_limit(0.5, 2.0, m * math.pi / 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_limit_is_weak_coupling_of_exact(self):
        t = np.linspace(0.0, 10.0, 401)
        deviations = []
        for J in (0.2, 0.1):
            deviations.append(np.max(np.abs(kappa_model1_exact(J, 1.0, t) - kappa_model1_limit(J, 1.0, t))))
            assert deviations[-1] <= 20.0 * J ** 4
        assert 12.0 <= deviations[0] / deviations[1] <= 20.0

    def test_ring_weights(self):
        assert kappa_model1_ring(0.0, 1.0, 3.0) == 1.0
        t = np.linspace(0.0, 5.0, 11)
        direct = 0.5 * kappa_model1_exact(0.4, 2.0, t) + 0.5 * np.cos(2.0 * 0.4 * t)
        np.testing.assert_allclose(kappa_model1_ring(0.4, 1.0, t), direct, atol=1e-14)

    def test_adiabatic_plateau(self):
        assert kappa_model1_adiabatic(0.5, 1.0) == pytest.approx(0.894427191, rel=1e-9)
        assert kappa_model1_adiabatic(0.3, 1.0) == pytest.approx(0.957826285, rel=1e-9)

    def test_rejects_non_positive_v(self):
        with pytest.raises(ConfigError):
            kappa_model1_exact(1.0, 0.0, 1.0)


class TestHypergeometric:
    def test_small_argument(self):
        result = hyp1f2_special(0.0)
        assert result.value == 1.0
        assert result.method is SeriesMethod.SERIES
        # leading terms 1 - x^2/6
        assert hyp1f2_special(1e-3).value == pytest.approx(1.0 - 1e-6 / 6.0, abs=1e-13)

    def test_sanity_value(self):
        assert band_average(5.0) == pytest.approx(5.1177, abs=1e-4)

    @pytest.mark.parametrize("x", [0.5, 1.0, 3.0, 7.5, 12.0, 20.0, 29.0])
    def test_series_matches_bessel_form(self, x):
        bessel = band_average(x, "bessel")
        assert x * x * hyp1f2_special(x).value == pytest.approx(bessel, abs=1e-9)

    @pytest.mark.parametrize("x", [12.0, 12.5, 17.0, 24.0, 30.0, 60.0])
    def test_series_matches_mpmath(self, x):
        expected = float(mpmath.hyp1f2(0.5, 1.5, 2, -mpmath.mpf(x) ** 2))
        assert hyp1f2_special(x, method=SeriesMethod.SERIES).value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("x", [30.5, 40.0, 50.0, 100.0])
    def test_asymptotic_branch(self, x):
        result = hyp1f2_special(x)
        assert result.method is SeriesMethod.ASYMPTOTIC
        exact = float(mpmath.hyp1f2(0.5, 1.5, 2, -mpmath.mpf(x) ** 2))
        # the first neglected order is smaller than the last included one
        assert abs(result.value - exact) <= result.est_error

    def test_switch_point_uses_series(self):
        assert hyp1f2_special(X_SWITCH).method is SeriesMethod.SERIES
        assert hyp1f2_special(X_SWITCH + 1e-9).method is SeriesMethod.ASYMPTOTIC

    def test_branches_agree_at_switch(self):
        series = hyp1f2_special(X_SWITCH, method=SeriesMethod.SERIES)
        asymptotic = hyp1f2_special(X_SWITCH, method=SeriesMethod.ASYMPTOTIC)
        assert series.value == pytest.approx(asymptotic.value, abs=asymptotic.est_error)

    def test_leading_oscillation_sign(self):
        x = 50.0
        phase = 2.0 * x - math.pi / 4.0
        leading = x - 0.5 * math.cos(phase) / math.sqrt(math.pi * x)
        flipped = x + 0.5 * math.cos(phase) / math.sqrt(math.pi * x)
        exact = x * x * float(mpmath.hyp1f2(0.5, 1.5, 2, -mpmath.mpf(x) ** 2))
        assert exact == pytest.approx(leading, abs=1e-3)
        assert abs(exact - flipped) > 1e-2
        assert abs(x * x * hyp1f2_special(x).value - leading) < 1e-3

    def test_series_leaves_global_precision_alone(self):
        before = mpmath.mp.dps
        hyp1f2_special(25.0)
        assert mpmath.mp.dps == before

    def test_concurrent_series_match_serial(self):
        xs = [float(x) for x in np.linspace(1.0, 30.0, 24)]
        serial = [hyp1f2_special(x).value for x in xs]
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = list(pool.map(lambda x: hyp1f2_special(x).value, xs))
        assert threaded == serial

    def test_rejects_bad_arguments(self):
        with pytest.raises(ConfigError):
            hyp1f2_special(-1.0)
        with pytest.raises(ConfigError):
            hyp1f2_special(float("nan"))
        with pytest.raises(ConfigError):
            hyp1f2_special(0.5, method=SeriesMethod.ASYMPTOTIC)


class TestBandAverage:
    @pytest.mark.parametrize("x", np.linspace(0.0, 30.0, 13))
    def test_methods_agree(self, x):
        series = band_average(x, "series")
        assert band_average(x, "quadrature") == pytest.approx(series, abs=1e-8)
        assert band_average(x, "bessel") == pytest.approx(series, abs=1e-8)

    def test_unknown_method(self):
        with pytest.raises(ConfigError, match="Available"):
            band_average(1.0, "simpson")

    def test_matches_direct_mean(self):
        x = 4.2
        k = np.linspace(-math.pi, math.pi, 4096, endpoint=False)
        direct = np.mean(x * x * np.sinc(x * np.cos(k) / math.pi) ** 2)
        assert band_average(x) == pytest.approx(direct, abs=1e-10)


class TestModel2:
    def test_quadrature_and_series_agree(self):
        J, V = 0.3, 1.0
        t = np.linspace(0.0, 30.0, 61)
        series = kappa_model2_integral(J, V, t, method="series")
        quadrature = kappa_model2_integral(J, V, t, method="quadrature")
        assert np.max(np.abs(series - quadrature)) <= 1e-8

    def test_non_increasing(self):
        t = np.linspace(0.0, 20.0, 201)
        values = kappa_model2_integral(0.5, 1.0, t)
        assert np.all(np.diff(values) <= 1e-15)
        assert kappa_model2_integral(0.5, 1.0, 10.0) < kappa_model2_integral(0.5, 1.0, 1.0)

    def test_long_time_rate(self):
        J, V = 0.2, 1.0
        for t in np.linspace(50.0, 200.0, 16):
            log_kappa = math.log(kappa_model2_integral(J, V, t))
            bound = 1.01 * (J * J / (V * V)) / math.sqrt(math.pi * V * t)
            assert abs(log_kappa + model2_decay_rate(J, V) * t) <= bound

    def test_short_time_is_gaussian(self):
        # M(x) ~ x^2 for small x
        t = 1e-3
        assert kappa_model2_integral(0.5, 1.0, t) == pytest.approx(math.exp(-0.5 * t * t), rel=1e-12)

    def test_riemann_sum_converges_spectrally(self):
        t = np.linspace(0.0, 10.0, 101)
        exact = kappa_model2_integral(0.3, 1.0, t)
        assert np.max(np.abs(kappa_model2_finiteN(0.3, 1.0, t, 64) - exact)) <= 1e-10

    def test_finite_n_zero_modes(self):
        # N = 4 has cos k = 0 modes; their limit value keeps the sum finite
        value = kappa_model2_finiteN(0.5, 1.0, 2.0, 4)
        x = 2.0
        expected = math.exp(-2 * 0.25 / 4 * (2 * math.sin(x) ** 2 + 2 * x * x))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_edge_integral_matches_open_chain_modes(self):
        spec = ChainSpec(model=ModelKind.XX, n_bath=512, j_coupling=0.2)
        t = np.linspace(0.0, 10.0, 51)
        reduced = kappa_reduced(open_chain_modes(spec), t)
        assert np.max(np.abs(reduced - kappa_model2_edge_integral(0.2, 1.0, t))) <= 1e-8

    def test_edge_integral_closed_form(self):
        x = 7.0
        expected = math.exp(-2 * 0.04 * (2 * band_average(x) - 1.0 + special.j0(2 * x)))
        assert kappa_model2_edge_integral(0.2, 1.0, x) == pytest.approx(expected, rel=1e-12)

    def test_rejects_negative_times(self):
        with pytest.raises(ConfigError):
            kappa_model2_integral(0.5, 1.0, -1.0)
