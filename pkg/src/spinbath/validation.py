"""
Cross-backend validation: every pair of series is compared under the invariant that
relates the two evaluation paths, and every series is checked on its own.
"""
import logging
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import ConfigError
from .freefermion import commutator_error_estimate
from .schema import (
    EPS_NUM,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    InvariantCheck,
    ModelKind,
    Provenance,
    ScheduleKind,
    TimeGrid,
)

logger = logging.getLogger("spinbath")

EXACT_SOLUTION_TOL = 1e-10
FINITE_SIZE_TOL = 1e-3
STATIC_REDUCTION_TOL = 1e-8
WEAK_COUPLING_FACTOR = 20.0
COMMUTATOR_FACTOR = 5.0

ED, FF, CF, IL, TD = (Provenance.EXACT_ED, Provenance.FREE_FERMION, Provenance.CLOSED_FORM,
                      Provenance.INTEGRAL_LIMIT, Provenance.TIME_DEPENDENT)


def _coupling(spec: ChainSpec, schedule: Optional[CouplingSchedule]) -> float:
    return schedule.j0 if schedule is not None else spec.j_coupling


def pair_invariant(first: Provenance,
                   second: Provenance,
                   spec: ChainSpec,
                   grid: TimeGrid,
                   schedule: Optional[CouplingSchedule] = None,
                   fallback: float = 1e-3) -> Tuple[str, float]:
    """(invariant name, tolerance) relating two backends on this run."""
    pair = {first, second}
    J, V = _coupling(spec, schedule), spec.v_coupling
    t_span = grid.t_end - grid.t_start

    if pair == {ED, CF} and spec.model is ModelKind.ISING:
        return "exact-solution", EXACT_SOLUTION_TOL
    if pair in ({ED, FF}, {ED, TD}):
        return "commutator-neglect", COMMUTATOR_FACTOR * float(commutator_error_estimate(J, t_span, spec.n_bath))
    if pair == {FF, IL}:
        return "finite-size", FINITE_SIZE_TOL
    if pair == {CF, IL}:
        if spec.model is ModelKind.XX:
            return "riemann-sum", FINITE_SIZE_TOL
        return "weak-coupling", WEAK_COUPLING_FACTOR * J ** 4 / V ** 4
    if pair == {FF, TD}:
        return "static-reduction", STATIC_REDUCTION_TOL
    return "cross-backend", fallback


def starts_history(series: DecoherenceSeries) -> bool:
    """True when kappa must equal 1 at the first sample: the coupling's history begins there."""
    schedule = series.schedule_echo
    if schedule is not None and schedule.kind is not ScheduleKind.CONSTANT:
        return True
    return series.grid.t_start == 0.0


def series_checks(series: DecoherenceSeries, tolerance: Optional[float] = None) -> List[InvariantCheck]:
    name = series.provenance.value
    magnitudes = np.abs(series.values)
    checks = [InvariantCheck(name=f"kappa-bound[{name}]",
                             deviation=max(0.0, float(np.max(magnitudes)) - 1.0),
                             tolerance=EPS_NUM if tolerance is None else tolerance)]
    if starts_history(series):
        checks.append(InvariantCheck(name=f"initial-coherence[{name}]",
                                     deviation=float(abs(series.values[0] - 1.0)),
                                     tolerance=EPS_NUM if tolerance is None else tolerance))
    return checks


def compare_series(results: Dict[Provenance, DecoherenceSeries],
                   tolerance: Optional[float] = None,
                   fallback: float = 1e-3) -> List[InvariantCheck]:
    """
    Checks for every series and every pair of series in ``results``.

    Args:
        results: one series per backend, all on the same grid and chain.
        tolerance: replaces every tolerance when given.
        fallback: tolerance for pairs without a dedicated invariant.
    """
    if len(results) < 2:
        raise ConfigError("validation needs at least two backends")
    order = list(Provenance)
    provenances = sorted(results, key=order.index)
    reference = results[provenances[0]]
    spec, grid, schedule = reference.spec_echo, reference.grid, reference.schedule_echo

    checks: List[InvariantCheck] = []
    for provenance in provenances:
        checks.extend(series_checks(results[provenance], tolerance))

    for first, second in combinations(provenances, 2):
        a, b = results[first], results[second]
        if a.grid != b.grid:
            raise ConfigError(f"{first.value} and {second.value} were sampled on different grids")
        name, pair_tol = pair_invariant(first, second, spec, grid, schedule, fallback)
        deviation = float(np.max(np.abs(a.values - b.values)))
        check = InvariantCheck(name=f"{name}[{first.value},{second.value}]", deviation=deviation,
                               tolerance=pair_tol if tolerance is None else tolerance)
        logger.info(check.to_line())
        checks.append(check)
    return checks


def format_report(checks: List[InvariantCheck]) -> str:
    return "".join(check.to_line() + "\n" for check in checks)


def all_passed(checks: List[InvariantCheck]) -> bool:
    return all(check.passed for check in checks)
