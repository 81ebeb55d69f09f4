import math

import numpy as np
import pytest

from spinbath.core import ConfigError
from spinbath.ed_oracle import kappa_ed_timedep
from spinbath.freefermion import adiabatic_mode_factor, adiabatic_plateau, kappa_product, mode_spectrum, modes_for
from spinbath.schema import CouplingSchedule, ModeBlock, Provenance, ScheduleKind, TimeGrid
from spinbath.timedep import (
    SWITCH_LEAD,
    extrapolate_plateau,
    integrate_mode,
    kappa_excluding_band_centre,
    kappa_timedep,
    mode_factors,
    recoherence_experiment,
    switch_off_schedule,
)


class TestConstantCoupling:
    @pytest.mark.parametrize("model,boundary", [("ising", "open"), ("xx", "open"), ("xx", "periodic")])
    def test_reduces_to_static_product(self, make_spec, model, boundary):
        spec = make_spec(model, 12, 0.3, boundary=boundary)
        grid = TimeGrid(t_end=10.0, n_samples=41)
        schedule = CouplingSchedule(kind=ScheduleKind.CONSTANT, j0=0.3)
        series = kappa_timedep(spec, schedule, grid)
        assert series.provenance is Provenance.TIME_DEPENDENT
        static = kappa_product(modes_for(spec), grid.times())
        assert np.max(np.abs(series.values - static)) <= 1e-8

    def test_constant_coupling_starts_at_zero(self, make_spec):
        schedule = CouplingSchedule(kind=ScheduleKind.CONSTANT, j0=0.3)
        with pytest.raises(ConfigError):
            kappa_timedep(make_spec("ising", 4, 0.3), schedule, TimeGrid(t_start=-1.0, t_end=1.0, n_samples=3))


class TestModeIntegration:
    def test_integrate_mode_is_unitary_and_starts_at_identity(self):
        block = ModeBlock(energy=0.8, g=0.1, k=0.0)
        schedule = switch_off_schedule(0.4, 1.0, 0.0)
        states = integrate_mode(block, schedule, TimeGrid(t_end=40.0, n_samples=21))
        assert len(states) == 21
        np.testing.assert_allclose(states[0].u_plus, np.eye(2), atol=1e-15)
        assert states[0].factor == pytest.approx(1.0)
        assert all(abs(s.factor) <= 1.0 + 1e-12 for s in states)

    def test_mode_factors_shape_and_dedupe(self, make_spec):
        spec = make_spec("ising", 16, 0.5)
        schedule = switch_off_schedule(0.5, 1.0, 0.0)
        blocks, factors = mode_factors(spec, schedule, 0.0, [10.0, 20.0, 40.0])
        assert len(blocks) == 16
        assert factors.shape == (3, 16)
        # a flat band: every mode evolves identically
        np.testing.assert_allclose(factors, factors[:, :1] * np.ones((1, 16)), atol=1e-15)

    def test_rejects_late_start(self, make_spec):
        schedule = CouplingSchedule(kind=ScheduleKind.SWITCH_OFF, j0=0.5, rate=1.0, t_off=5.0)
        with pytest.raises(ConfigError):
            kappa_timedep(make_spec("ising", 4, 0.5), schedule, TimeGrid(t_end=10.0, n_samples=3))

    def test_switch_off_schedule_lead(self):
        schedule = switch_off_schedule(0.5, 0.25, -3.0)
        assert schedule.rate * (schedule.t_off + 3.0) == pytest.approx(SWITCH_LEAD)

    def test_band_centre_exclusion(self, make_spec):
        spec = make_spec("xx", 8, 0.2)
        schedule = switch_off_schedule(0.2, 1.0, 0.0)
        blocks, factors = mode_factors(spec, schedule, 0.0, [5.0, 10.0])
        everything = kappa_excluding_band_centre(blocks, factors, 1.0, 0.0)
        np.testing.assert_allclose(everything, np.prod(factors, axis=1))
        outer = kappa_excluding_band_centre(blocks, factors, 1.0, 0.5)
        keep = [i for i, b in enumerate(blocks) if abs(b.energy) >= 0.5]
        np.testing.assert_allclose(outer, np.prod(factors[:, keep], axis=1))


class TestSwitching:
    def test_matches_exact_dynamics(self, make_spec):
        spec = make_spec("ising", 6, 0.2)
        schedule = CouplingSchedule(kind=ScheduleKind.SWITCH_OFF, j0=0.2, rate=0.5, t_off=0.0)
        grid = TimeGrid(t_start=-40.0, t_end=20.0, n_samples=121)
        modes = kappa_timedep(spec, schedule, grid).values
        exact = kappa_ed_timedep(spec, schedule, grid=grid).values
        tau = grid.times() - grid.t_start
        assert np.all(np.abs(modes - exact) <= 5.0 * 0.2 ** 4 * tau ** 4 + 1e-9)

    def test_sudden_switch_freezes_coherence(self, make_spec):
        spec = make_spec("ising", 8, 0.2)
        schedule = CouplingSchedule(kind=ScheduleKind.SWITCH_OFF, j0=0.2, rate=100.0, t_off=0.0)
        grid = TimeGrid(t_start=-5.0, t_end=5.0, n_samples=101)
        series = kappa_timedep(spec, schedule, grid)
        after = series.values[grid.times() >= 0.5]
        assert np.max(np.abs(after - after[0])) <= 1e-6
        static = kappa_product(mode_spectrum(spec), 5.0)
        assert abs(after[-1] - static) <= 1e-4

    def test_adiabatic_anchor_mode(self):
        j0, n_bath = 0.5, 64
        block = ModeBlock(energy=1.0, g=j0 / math.sqrt(n_bath), k=0.0)
        schedule = switch_off_schedule(j0, 0.01, 0.0)
        grid = TimeGrid(t_end=schedule.t_off + SWITCH_LEAD / 0.01, n_samples=2)
        factor = abs(integrate_mode(block, schedule, grid)[-1].factor)
        assert factor == pytest.approx(adiabatic_mode_factor(block), abs=1e-5)
        first_order = 1.0 - j0 ** 2 / (2.0 * n_bath)
        assert abs(factor - first_order) <= 0.1 * (1.0 - first_order)

    def test_model1_adiabatic_plateau(self, make_spec):
        spec = make_spec("ising", 64, 0.5)
        schedule = switch_off_schedule(0.5, 0.01, 0.0)
        t_end = schedule.t_off + SWITCH_LEAD / 0.01
        _, factors = mode_factors(spec, schedule, 0.0, [t_end])
        plateau = abs(np.prod(factors[-1]))
        assert plateau == pytest.approx(adiabatic_plateau(mode_spectrum(spec)), abs=1e-4)
        assert plateau == pytest.approx(math.exp(-0.125), rel=0.03)

    @pytest.mark.slow
    def test_model2_plateau_rises_without_band_centre(self, make_spec):
        spec = make_spec("xx", 64, 0.5)
        schedule = switch_off_schedule(0.5, 0.01, 0.0)
        blocks, factors = mode_factors(spec, schedule, 0.0, [schedule.t_off + SWITCH_LEAD / 0.01])
        plateaus = [abs(kappa_excluding_band_centre(blocks, factors, 1.0, delta)[-1])
                    for delta in (0.0, 0.05, 0.1, 0.2, 0.4)]
        assert all(lower < higher for lower, higher in zip(plateaus, plateaus[1:]))
        assert plateaus[0] < 0.1
        assert plateaus[-1] > 0.75

    def test_model1_extrapolation(self, make_spec):
        result = extrapolate_plateau(make_spec("ising", 8, 0.5), 0.5, 0.01, sizes=(32, 64))
        assert result.sizes == [32, 64]
        expected = [adiabatic_plateau(mode_spectrum(make_spec("ising", n, 0.5))) for n in (32, 64)]
        assert result.plateaus == pytest.approx(expected, abs=1e-4)
        assert result.limit == pytest.approx(2 * result.plateaus[1] - result.plateaus[0])
        assert result.limit == pytest.approx(math.exp(-0.125), abs=2e-3)

    def test_extrapolation_needs_two_sizes(self, make_spec):
        with pytest.raises(ConfigError):
            extrapolate_plateau(make_spec("ising", 8, 0.5), 0.5, 0.01, sizes=(64,))

    @pytest.mark.slow
    def test_model2_decoheres_completely(self, make_spec):
        result = extrapolate_plateau(make_spec("xx", 64, 0.5), 0.5, 0.01, sizes=(64, 128, 256))
        assert result.plateaus[0] > result.plateaus[1] > result.plateaus[2]
        assert result.limit <= 0.05


class TestRecoherence:
    GRID = TimeGrid(t_start=0.0, t_end=4010.0, n_samples=41)

    @pytest.mark.slow
    def test_model1_recovers(self, make_spec):
        report = recoherence_experiment(make_spec("ising", 64, 0.5), 0.5, 0.01, 1000.0, self.GRID)
        assert report.kappa_off_plateau < report.kappa_initial_envelope
        assert report.kappa_final_envelope >= 0.98 * report.kappa_initial_envelope

    @pytest.mark.slow
    def test_model2_never_recovers(self, make_spec):
        report = recoherence_experiment(make_spec("xx", 64, 0.5), 0.5, 0.01, 1000.0, self.GRID)
        assert report.kappa_final_envelope <= 0.05

    def test_uncoupled_qubit_keeps_coherence(self, make_spec):
        report = recoherence_experiment(make_spec("ising", 4, 0.0), 0.0, 0.05, 200.0,
                                        TimeGrid(t_end=1000.0, n_samples=5))
        assert report.kappa_initial_envelope == pytest.approx(1.0)
        assert report.kappa_off_plateau == pytest.approx(1.0)
        assert report.kappa_final_envelope == pytest.approx(1.0)

    @pytest.mark.parametrize("rate,gap,t_end", [(0.1, 1000.0, 5000.0), (0.01, 500.0, 5000.0), (0.01, 1000.0, 3000.0)])
    def test_preconditions(self, make_spec, rate, gap, t_end):
        with pytest.raises(ConfigError):
            recoherence_experiment(make_spec("ising", 4, 0.5), 0.5, rate, gap,
                                   TimeGrid(t_end=t_end, n_samples=5))
