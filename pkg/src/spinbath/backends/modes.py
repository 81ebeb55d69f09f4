from typing import Optional

from ..freefermion import kappa_product, modes_for
from ..schema import ChainSpec, CouplingSchedule, Provenance, ScheduleKind, TimeGrid
from ..timedep import check_start, kappa_timedep
from .base import BaseBackend


class FreeFermionBackend(BaseBackend):
    """Product of exact per-mode factors at finite N."""
    provenance = Provenance.FREE_FERMION

    def _check_request(self, spec, grid, schedule) -> None:
        self._static_spec(spec, schedule)

    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        spec = self._static_spec(spec, schedule)
        return kappa_product(modes_for(spec), grid.times())


class TimeDependentBackend(BaseBackend):
    """Per-mode propagators under J(t); without a schedule the coupling is held at spec.j_coupling."""
    provenance = Provenance.TIME_DEPENDENT

    def __init__(self, step_tolerance: float = 1e-10):
        self.step_tolerance = step_tolerance

    def _check_request(self, spec, grid, schedule) -> None:
        if schedule is not None:
            check_start(schedule, grid.t_start)

    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        schedule = schedule or CouplingSchedule(kind=ScheduleKind.CONSTANT, j0=spec.j_coupling)
        return kappa_timedep(spec, schedule, grid, self.step_tolerance)
