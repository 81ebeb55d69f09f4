from typing import List, Optional

from ..core import ConfigError
from ..ed_oracle import MAX_DYNAMIC_SPINS, MAX_STATIC_SPINS, kappa_ed_static, kappa_ed_timedep
from ..schema import BathState, ChainSpec, CouplingSchedule, Provenance, ScheduleKind, TimeGrid
from .base import BaseBackend


class ExactEDBackend(BaseBackend):
    provenance = Provenance.EXACT_ED

    def __init__(self, bath_spins: Optional[List[int]] = None, step_tolerance: float = 1e-10):
        """
        Args:
            bath_spins: +-1 per bath spin for a product initial state; fully mixed when None.
            step_tolerance: local tolerance of the Magnus integrator for switching schedules.
        """
        self.bath_spins = bath_spins
        self.step_tolerance = step_tolerance

    def _bath(self) -> Optional[BathState]:
        if self.bath_spins is None:
            return None
        return BathState.product(self.bath_spins)

    def _check_request(self, spec, grid, schedule) -> None:
        dynamic = schedule is not None and schedule.kind is not ScheduleKind.CONSTANT
        limit = MAX_DYNAMIC_SPINS if dynamic else MAX_STATIC_SPINS
        if spec.n_bath > limit:
            raise ConfigError(f"exact-ed is limited to N <= {limit} bath spins here (got N={spec.n_bath})")
        if self.bath_spins is not None and len(self.bath_spins) != spec.n_bath:
            raise ConfigError(f"bath_spins has {len(self.bath_spins)} entries, chain has {spec.n_bath} spins")

    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        if schedule is not None and schedule.kind is not ScheduleKind.CONSTANT:
            return kappa_ed_timedep(spec, schedule, bath=self._bath(), grid=grid,
                                    tolerance=self.step_tolerance)
        return kappa_ed_static(self._static_spec(spec, schedule), bath=self._bath(), grid=grid)
