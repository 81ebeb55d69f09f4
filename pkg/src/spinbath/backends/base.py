import logging
import time
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from ..core import ConfigError, build_series
from ..schema import ChainSpec, CouplingSchedule, DecoherenceSeries, Provenance, ScheduleKind, TimeGrid

logger = logging.getLogger("spinbath")


class BaseBackend(ABC):
    """
    Abstract base class for a kappa(t) backend.
    Subclasses declare their provenance and compute raw samples; the base class checks
    the request, times the run and packages the result.
    """

    provenance: Provenance

    def series(self,
               spec: ChainSpec,
               grid: TimeGrid,
               schedule: Optional[CouplingSchedule] = None) -> DecoherenceSeries:
        """
        Public interface: kappa on every point of ``grid``.
        """
        # 1. reject what this backend cannot compute
        self._check_request(spec, grid, schedule)

        # 2. evaluate and package
        started = time.perf_counter()
        result = self._evaluate(spec, grid, schedule)
        if not isinstance(result, DecoherenceSeries):
            result = build_series(grid, np.asarray(result), self.provenance, spec, schedule)
        logger.info(f"[{self.provenance.value}] {spec.describe()}: {grid.n_samples} samples "
                    f"in {time.perf_counter() - started:.3f}s")
        return result

    @abstractmethod
    def _check_request(self,
                       spec: ChainSpec,
                       grid: TimeGrid,
                       schedule: Optional[CouplingSchedule]) -> None:
        """Raise ConfigError for parameters outside this backend's domain."""
        pass

    @abstractmethod
    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        """Samples of kappa on the grid, either raw values or a finished series."""
        pass

    def _static_spec(self, spec: ChainSpec, schedule: Optional[CouplingSchedule]) -> ChainSpec:
        """The chain at constant coupling: spec.j_coupling, or j0 of a constant schedule."""
        if schedule is None:
            return spec
        if schedule.kind is not ScheduleKind.CONSTANT:
            raise ConfigError(f"{self.provenance.value} backend is static; "
                              f"it cannot follow a {schedule.kind.value} schedule")
        return spec.with_coupling(schedule.j0)
