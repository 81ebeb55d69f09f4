"""Fourth-order Magnus propagation for Hamiltonians affine in a scheduled coupling."""
import logging
import math
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .core import ConvergenceError, eval_coupling
from .schema import CouplingSchedule

logger = logging.getLogger("spinbath")

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0
_COMMUTATOR_WEIGHT = math.sqrt(3.0) / 12.0

# Smallest admissible step as a fraction of the integration span.
UNDERFLOW_FRACTION = 1e-9


def hermitian_expm(hamiltonian: np.ndarray, h: float) -> np.ndarray:
    """exp(-i H h) for a stack of Hermitian matrices, via eigendecomposition (exactly unitary)."""
    w, v = np.linalg.eigh(hamiltonian)
    phases = np.exp(-1j * h * w)
    return (v * phases[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dagger U - I| over a stack; also valid for isometries such as propagated kets."""
    gram = np.conj(np.swapaxes(u, -1, -2)) @ u
    return float(np.max(np.abs(gram - np.eye(gram.shape[-1]))))


class MagnusIntegrator:
    """
    Propagates a stack of states under H(t) = A + J(t) B, one (A, B) pair per block.

    Each step uses the two-point Gauss Magnus expansion

        H_eff = A + (J1 + J2)/2 B + i sqrt(3)/12 h (J2 - J1) [A, B]

    and exponentiates H_eff exactly. The local error is measured by step doubling and
    the step adapts to keep it below ``tolerance``. Stretches where J is constant are
    propagated exactly, so they only cost the step cap.
    """

    def __init__(self,
                 static: np.ndarray,
                 coupling: np.ndarray,
                 schedule: CouplingSchedule,
                 tolerance: float = 1e-10,
                 max_step: Optional[float] = None):
        """
        Args:
            static: (n_blocks, d, d) Hermitian A.
            coupling: (n_blocks, d, d) Hermitian B.
            schedule: provides J(t).
            tolerance: max-norm bound on the step-doubling difference of one step.
            max_step: step cap; defaults to pi over a bound on ||H||.
        """
        self.static = np.asarray(static, dtype=complex)
        self.coupling = np.asarray(coupling, dtype=complex)
        if self.static.ndim != 3 or self.static.shape != self.coupling.shape:
            raise ValueError(f"static {self.static.shape} and coupling {self.coupling.shape} "
                             f"must both be (n_blocks, d, d)")
        self.schedule = schedule
        self.tolerance = tolerance
        self.commutator = self.static @ self.coupling - self.coupling @ self.static
        self.max_step = max_step if max_step is not None else self._default_max_step()

        self.accepted = 0
        self.rejected = 0
        self.smallest_step = math.inf

    def _default_max_step(self) -> float:
        j_peak = self.schedule.j0 * (1.0 + 1e-4)
        bound = (np.linalg.norm(self.static, ord=2, axis=(-2, -1))
                 + j_peak * np.linalg.norm(self.coupling, ord=2, axis=(-2, -1)))
        peak = float(np.max(bound))
        return math.pi / peak if peak > 0.0 else math.inf

    def step(self, t: float, h: float) -> np.ndarray:
        """Propagator of every block from t to t + h."""
        j1 = eval_coupling(self.schedule, t + (0.5 - _GAUSS_OFFSET) * h)
        j2 = eval_coupling(self.schedule, t + (0.5 + _GAUSS_OFFSET) * h)
        effective = (self.static
                     + (0.5 * (j1 + j2)) * self.coupling
                     + (1j * _COMMUTATOR_WEIGHT * h * (j2 - j1)) * self.commutator)
        return hermitian_expm(effective, h)

    def run(self,
            t_start: float,
            sample_times: Sequence[float],
            initial: np.ndarray) -> Iterator[Tuple[float, np.ndarray]]:
        """
        Yield (t, state) at every sample time, starting from ``initial`` at ``t_start``.

        Args:
            t_start: time at which ``initial`` is given.
            sample_times: non-decreasing times, none before t_start.
            initial: (n_blocks, d, m) states, e.g. identities for full propagators.
        """
        samples = np.asarray(sample_times, dtype=float)
        if samples.size == 0:
            return
        if samples[0] < t_start or np.any(np.diff(samples) < 0.0):
            raise ValueError("sample times must be non-decreasing and not before t_start")

        span = float(samples[-1] - t_start)
        floor = UNDERFLOW_FRACTION * span
        state = np.array(initial, dtype=complex)
        t = float(t_start)
        h = min(self.max_step, span / 16.0) if span > 0.0 else 0.0

        for target in samples:
            target = float(target)
            while target - t > 1e-13 * max(1.0, abs(target)):
                clipped = target - t <= h
                trial = target - t if clipped else h
                full = self.step(t, trial)
                first = self.step(t, 0.5 * trial)
                second = self.step(t + 0.5 * trial, 0.5 * trial)
                composed = second @ first
                block_errors = np.max(np.abs(full - composed), axis=(-2, -1))
                error = float(np.max(block_errors))

                if error <= self.tolerance:
                    state = composed @ state
                    t = target if clipped else t + trial
                    self.accepted += 1
                    self.smallest_step = min(self.smallest_step, trial)
                    growth = 4.0 if error == 0.0 else min(4.0, 0.9 * (self.tolerance / error) ** 0.2)
                    # a step shortened to land on a sample says nothing against the current h
                    h = max(h, trial * growth) if clipped else trial * growth
                    h = min(h, self.max_step)
                else:
                    self.rejected += 1
                    h = trial * max(0.2, 0.9 * (self.tolerance / error) ** 0.2)
                    if h < floor:
                        raise ConvergenceError(
                            f"step size underflow at t={t:.6g}: h={h:.3g} < {floor:.3g}",
                            mode_index=int(np.argmax(block_errors)))
            yield target, state

        logger.debug(f"Magnus run over [{t_start:.6g}, {samples[-1]:.6g}]: {self.accepted} steps accepted, "
                     f"{self.rejected} rejected, smallest step {self.smallest_step:.3g}")
