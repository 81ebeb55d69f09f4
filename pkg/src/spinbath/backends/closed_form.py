from typing import Optional

from ..analytic import (
    BAND_AVERAGE_METHODS,
    kappa_model1_exact,
    kappa_model1_limit,
    kappa_model1_ring,
    kappa_model2_edge_integral,
    kappa_model2_finiteN,
    kappa_model2_integral,
)
from ..core import ConfigError
from ..freefermion import kappa_reduced, open_chain_modes
from ..schema import Boundary, ChainSpec, CouplingSchedule, ModelKind, Provenance, TimeGrid
from .base import BaseBackend


def _is_ring(spec: ChainSpec) -> bool:
    return spec.boundary is Boundary.PERIODIC and spec.n_bath >= 3


class ClosedFormBackend(BaseBackend):
    """Exact model-1 solutions and the large-N model-2 mode sums at finite N."""
    provenance = Provenance.CLOSED_FORM

    def _check_request(self, spec, grid, schedule) -> None:
        self._static_spec(spec, schedule)

    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        spec = self._static_spec(spec, schedule)
        J, V, t = spec.j_coupling, spec.v_coupling, grid.times()
        if spec.model is ModelKind.ISING:
            return kappa_model1_ring(J, V, t) if _is_ring(spec) else kappa_model1_exact(J, V, t)
        if spec.boundary is Boundary.OPEN:
            return kappa_reduced(open_chain_modes(spec), t)
        return kappa_model2_finiteN(J, V, t, spec.n_bath)


class IntegralLimitBackend(BaseBackend):
    """N -> infinity limits."""
    provenance = Provenance.INTEGRAL_LIMIT

    def __init__(self, method: str = "series", quad_tolerance: float = 1e-11):
        """
        Args:
            method: band-average evaluation for model 2, one of BAND_AVERAGE_METHODS.
            quad_tolerance: absolute tolerance of the "quadrature" method.
        """
        if method not in BAND_AVERAGE_METHODS:
            raise ConfigError(f"Unknown band-average method: '{method}'. Available: {list(BAND_AVERAGE_METHODS)}")
        self.method = method
        self.quad_tolerance = quad_tolerance

    def _check_request(self, spec, grid, schedule) -> None:
        self._static_spec(spec, schedule)
        if spec.model is ModelKind.XX and grid.t_start < 0.0:
            raise ConfigError("the model-2 limit is defined for t >= 0")

    def _evaluate(self, spec: ChainSpec, grid: TimeGrid, schedule: Optional[CouplingSchedule]):
        spec = self._static_spec(spec, schedule)
        J, V, t = spec.j_coupling, spec.v_coupling, grid.times()
        if spec.model is ModelKind.ISING:
            return kappa_model1_limit(J, V, t)
        if spec.boundary is Boundary.OPEN:
            return kappa_model2_edge_integral(J, V, t, self.method, self.quad_tolerance)
        return kappa_model2_integral(J, V, t, self.method, self.quad_tolerance)
