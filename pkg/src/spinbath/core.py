import logging
from typing import List, Optional, Union

import numpy as np
from scipy.special import expit

from .schema import (
    EPS_NUM,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    Provenance,
    QubitState,
    ScheduleKind,
    TimeGrid,
)

logger = logging.getLogger("spinbath")

ArrayLike = Union[float, np.ndarray]


class SpinBathError(Exception):
    """Base class for errors raised by spinbath."""


class ConfigError(SpinBathError, ValueError):
    """Invalid parameters, resource guards and violated preconditions."""


class NumericalError(SpinBathError, RuntimeError):
    """A computation produced an unphysical or unreliable result."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, mode_index: Optional[int] = None):
        super().__init__(message)
        self.mode_index = mode_index


def scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def eval_coupling(schedule: CouplingSchedule, t: ArrayLike) -> ArrayLike:
    """
    J(t) for a schedule; accepts a scalar or an array of times.

    The logistic 1/(e^x + 1) is evaluated as expit(-x), which stays finite for any x.
    """
    t = np.asarray(t, dtype=float)
    if schedule.kind is ScheduleKind.CONSTANT:
        value = np.full(t.shape, schedule.j0)
    elif schedule.kind is ScheduleKind.SWITCH_OFF:
        value = schedule.j0 * expit(-schedule.rate * (t - schedule.t_off))
    else:
        # 1 - f(t - t_on) == expit(rate * (t - t_on))
        value = schedule.j0 * (expit(-schedule.rate * (t - schedule.t_off))
                               + expit(schedule.rate * (t - schedule.t_on)))
    return scalar_or_array(value)


def apply_kappa(rho0: QubitState, kappa: complex) -> QubitState:
    """Scale the qubit coherence rho12 by kappa; populations are untouched."""
    kappa = complex(kappa)
    magnitude = abs(kappa)
    if magnitude > 1.0 + EPS_NUM:
        raise NumericalError(f"|kappa| = {magnitude!r} exceeds 1 + {EPS_NUM}")
    if magnitude > 1.0:
        kappa /= magnitude
    return QubitState(rho11=rho0.rho11, rho22=rho0.rho22, rho12=rho0.rho12 * kappa)


def evolve_qubit(rho0: QubitState, series: DecoherenceSeries) -> List[QubitState]:
    return [apply_kappa(rho0, kappa) for kappa in series.values]


def check_kappa_bound(values: np.ndarray, provenance: Provenance) -> None:
    magnitudes = np.abs(values)
    if not np.all(np.isfinite(magnitudes)):
        raise NumericalError(f"{provenance.value}: kappa has non-finite samples")
    worst = int(np.argmax(magnitudes))
    if magnitudes[worst] > 1.0 + EPS_NUM:
        raise NumericalError(
            f"{provenance.value}: |kappa| = {magnitudes[worst]!r} > 1 + {EPS_NUM} at sample {worst}")


def build_series(grid: TimeGrid,
                 values: np.ndarray,
                 provenance: Provenance,
                 spec: ChainSpec,
                 schedule: Optional[CouplingSchedule] = None) -> DecoherenceSeries:
    """
    Package kappa samples as an immutable series.

    Samples within EPS_NUM above the unit circle are pulled back onto it; anything beyond
    is an internal failure.
    """
    values = np.asarray(values, dtype=complex).reshape(-1)
    check_kappa_bound(values, provenance)
    magnitudes = np.abs(values)
    over = magnitudes > 1.0
    if np.any(over):
        values = values.copy()
        values[over] /= magnitudes[over]
    return DecoherenceSeries(grid=grid, values=values, provenance=provenance,
                             spec_echo=spec, schedule_echo=schedule)
