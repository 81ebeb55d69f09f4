"""
Per-mode dynamics under a switchable coupling J(t).

Each mode carries H_n^{+-}(t) = 2E |0><0| +- J(t) w sigma^y, where w is the mode's coupling
per unit J. The two sector propagators start at the identity and the mode contributes
tr(u-^dagger u+)/2 to kappa.
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from .core import ConfigError, ConvergenceError, NumericalError, build_series
from .freefermion import modes_for
from .propagator import MagnusIntegrator, unitarity_defect
from .schema import (
    UNITARITY_TOL,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    ModeBlock,
    ModePropagatorState,
    PlateauExtrapolation,
    Provenance,
    RecoherenceReport,
    ScheduleKind,
    TimeGrid,
)

logger = logging.getLogger("spinbath")

# rate * (t_off - t_start) for a start with the coupling fully on (J within e^-20 of j0)
SWITCH_LEAD = 20.0
# rate * distance from a ramp centre after which the coupling counts as settled
SETTLE = 10.0
MAX_ADIABATIC_RATE = 0.05

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def switch_off_schedule(j0: float, rate: float, t_start: float) -> CouplingSchedule:
    return CouplingSchedule(kind=ScheduleKind.SWITCH_OFF, j0=j0, rate=rate,
                            t_off=t_start + SWITCH_LEAD / rate)


def check_start(schedule: CouplingSchedule, t_start: float) -> None:
    if schedule.kind is ScheduleKind.CONSTANT:
        return
    lead = schedule.rate * (schedule.t_off - t_start)
    if lead < SWITCH_LEAD - 1e-9:
        raise ConfigError(
            f"integration starts at t={t_start!r}, only {lead:.3g}/rate before the switch-off at "
            f"t_off={schedule.t_off!r}; need rate*(t_off - t_start) >= {SWITCH_LEAD}")


def _sector_stack(energies: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Static and coupling parts for all modes, plus sector first, then minus."""
    n_modes = energies.shape[0]
    static = np.zeros((n_modes, 2, 2), dtype=complex)
    static[:, 0, 0] = 2.0 * energies
    coupling = weights[:, None, None] * _SIGMA_Y
    return np.concatenate([static, static]), np.concatenate([coupling, -coupling])


def _propagate(energies: np.ndarray,
               weights: np.ndarray,
               schedule: CouplingSchedule,
               t_start: float,
               times: np.ndarray,
               tolerance: float) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """(t, u_plus, u_minus) at every sample, each u of shape (n_modes, 2, 2)."""
    static, coupling = _sector_stack(energies, weights)
    n_modes = energies.shape[0]
    initial = np.broadcast_to(np.eye(2, dtype=complex), static.shape).copy()
    integrator = MagnusIntegrator(static, coupling, schedule, tolerance=tolerance)

    try:
        samples = [(t, state[:n_modes], state[n_modes:])
                   for t, state in integrator.run(t_start, times, initial)]
    except ConvergenceError as exc:
        block = exc.mode_index if exc.mode_index is not None else 0
        raise ConvergenceError(f"{exc} (mode {block % n_modes})", mode_index=block % n_modes) from exc

    if samples:
        _, u_plus, u_minus = samples[-1]
        defect = max(unitarity_defect(u_plus), unitarity_defect(u_minus))
        if defect > UNITARITY_TOL:
            raise NumericalError(f"mode propagator unitarity defect {defect:.3g} at t={samples[-1][0]!r}")
    logger.debug(f"{n_modes} modes over [{t_start:.6g}, {times[-1]:.6g}]: "
                 f"{integrator.accepted} steps, {integrator.rejected} rejected")
    return samples


def _factor(u_plus: np.ndarray, u_minus: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(np.conj(u_minus) * u_plus, axis=(-2, -1))


def integrate_mode(block: ModeBlock,
                   schedule: CouplingSchedule,
                   grid: TimeGrid,
                   tolerance: float = 1e-10) -> List[ModePropagatorState]:
    """
    Time-ordered propagators of one mode on the grid.

    Args:
        block: the mode; block.g is its coupling at full strength J = schedule.j0.
        schedule: coupling profile. Switching schedules must start fully on.
        grid: sample times; propagators are the identity at grid.t_start.
        tolerance: local step tolerance.
    """
    check_start(schedule, grid.t_start)
    weight = block.g / schedule.j0 if schedule.j0 > 0.0 else 0.0
    samples = _propagate(np.array([block.energy]), np.array([weight]), schedule,
                         grid.t_start, grid.times(), tolerance)
    return [ModePropagatorState(u_plus=u_plus[0], u_minus=u_minus[0], t=t)
            for t, u_plus, u_minus in samples]


def unit_modes(spec: ChainSpec) -> List[ModeBlock]:
    """Modes of ``spec`` with g expressed per unit coupling, ordered by index."""
    return sorted(modes_for(spec.with_coupling(1.0)), key=lambda b: b.index)


def mode_factors(spec: ChainSpec,
                 schedule: CouplingSchedule,
                 t_start: float,
                 times: Sequence[float],
                 tolerance: float = 1e-10) -> Tuple[List[ModeBlock], np.ndarray]:
    """
    Per-mode factors tr(u-^dagger u+)/2 at ``times`` for every mode of ``spec``.

    Returns:
        (blocks per unit coupling, complex array of shape (n_times, n_modes)).
    """
    check_start(schedule, t_start)
    times = np.asarray(times, dtype=float)
    blocks = unit_modes(spec)
    pairs = np.array([[b.energy, b.g] for b in blocks])
    # modes sharing (E, w) have identical dynamics
    unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    try:
        samples = _propagate(unique[:, 0], unique[:, 1], schedule, t_start, times, tolerance)
    except ConvergenceError as exc:
        mode = int(np.flatnonzero(inverse == exc.mode_index)[0]) if exc.mode_index is not None else None
        raise ConvergenceError(f"mode integration failed for {spec.describe()}, mode index {mode}: {exc}",
                               mode_index=mode) from exc
    factors = np.array([_factor(u_plus, u_minus) for _, u_plus, u_minus in samples])
    return blocks, factors[:, inverse]


def kappa_timedep(spec: ChainSpec,
                  schedule: CouplingSchedule,
                  grid: TimeGrid,
                  tolerance: float = 1e-10) -> DecoherenceSeries:
    """
    kappa(t) as the product over modes of the time-dependent per-mode factors.

    A switching schedule starts its history at grid.t_start. A constant coupling is
    switched on at t = 0, as in the static backends, so the grid must not start before 0.
    """
    origin = grid.t_start
    if schedule.kind is ScheduleKind.CONSTANT:
        if grid.t_start < 0.0:
            raise ConfigError("a constant coupling is on from t = 0; the grid cannot start before it")
        origin = 0.0
    _, factors = mode_factors(spec, schedule, origin, grid.times(), tolerance)
    values = np.prod(factors, axis=1)
    return build_series(grid, values, Provenance.TIME_DEPENDENT, spec, schedule)


def kappa_excluding_band_centre(blocks: Sequence[ModeBlock],
                                factors: np.ndarray,
                                v_coupling: float,
                                delta: float) -> np.ndarray:
    """Product over the modes with |E|/V >= delta only."""
    keep = np.array([abs(b.energy) / v_coupling >= delta for b in blocks], dtype=bool)
    return np.prod(factors[:, keep], axis=1)


def recoherence_experiment(spec: ChainSpec,
                           j0: float,
                           rate: float,
                           gap: float,
                           grid: TimeGrid,
                           tolerance: float = 1e-10) -> RecoherenceReport:
    """
    Switch the coupling off and back on adiabatically and compare coherence before and after.

    The switch-off ramp is centred 20/rate after grid.t_start and the switch-on ramp
    ``gap`` later. Envelopes are max |kappa| over one period 2 pi / V, sampled
    grid.n_samples times, ending 10/rate before the switch-off and starting 10/rate
    after the switch-on. The off value is taken midway between the ramps.
    """
    V = spec.v_coupling
    if rate > MAX_ADIABATIC_RATE * V:
        raise ConfigError(f"rate {rate!r} is not adiabatic; need rate <= {MAX_ADIABATIC_RATE} V")
    if gap * rate < SETTLE:
        raise ConfigError(f"gap * rate = {gap * rate:.3g} < {SETTLE}")

    t_off = grid.t_start + SWITCH_LEAD / rate
    t_on = t_off + gap
    schedule = CouplingSchedule(kind=ScheduleKind.SWITCH_OFF_ON, j0=j0, rate=rate, t_off=t_off, t_on=t_on)

    period = 2.0 * math.pi / V
    settle = SETTLE / rate
    before = np.linspace(t_off - settle - period, t_off - settle, grid.n_samples)
    middle = np.array([0.5 * (t_off + t_on)])
    after = np.linspace(t_on + settle, t_on + settle + period, grid.n_samples)
    if grid.t_end < after[-1] - 1e-9:
        raise ConfigError(f"grid ends at {grid.t_end!r}; the recoupled window needs t_end >= {after[-1]!r}")

    times = np.concatenate([before, middle, after])
    _, factors = mode_factors(spec, schedule, grid.t_start, times, tolerance)
    kappa = np.abs(np.prod(factors, axis=1))
    n = grid.n_samples
    report = RecoherenceReport(kappa_initial_envelope=float(np.max(kappa[:n])),
                               kappa_off_plateau=float(kappa[n]),
                               kappa_final_envelope=float(np.max(kappa[n + 1:])))
    logger.info(f"Recoherence {spec.describe()} j0={j0!r} rate={rate!r} gap={gap!r}: "
                f"initial {report.kappa_initial_envelope:.6g}, off {report.kappa_off_plateau:.6g}, "
                f"final {report.kappa_final_envelope:.6g}")
    return report


def extrapolate_plateau(spec: ChainSpec,
                        j0: float,
                        rate: float,
                        sizes: Sequence[int] = (64, 128, 256),
                        tolerance: float = 1e-10) -> PlateauExtrapolation:
    """
    |kappa| left after an adiabatic switch-off for each bath size, and a Richardson
    extrapolation in 1/N over the two largest sizes.
    """
    if len(sizes) < 2:
        raise ConfigError("plateau extrapolation needs at least two bath sizes")
    schedule = switch_off_schedule(j0, rate, 0.0)
    t_end = schedule.t_off + SWITCH_LEAD / rate
    plateaus = []
    for n_bath in sizes:
        _, factors = mode_factors(spec.with_size(n_bath), schedule, 0.0, [t_end], tolerance)
        plateaus.append(float(abs(np.prod(factors[-1]))))
        logger.info(f"Plateau N={n_bath}: {plateaus[-1]:.6g}")
    n1, n2 = sizes[-2], sizes[-1]
    limit = (n2 * plateaus[-1] - n1 * plateaus[-2]) / (n2 - n1)
    return PlateauExtrapolation(sizes=list(sizes), plateaus=plateaus, limit=limit)
