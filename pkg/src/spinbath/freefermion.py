"""
Free-fermion mode reduction.

After the Jordan-Wigner and Bogoliubov steps the bath is a set of modes, each a two-level
block H_n^{+-} = [[2E, -+ig], [+-ig, 0]]. Neglecting the commutators between different
modes, kappa is the product of the per-mode factors.
"""
import logging
import math
from typing import List, Sequence

import numpy as np

from .core import ArrayLike, ConfigError, scalar_or_array
from .schema import Boundary, ChainSpec, ModeBlock, ModelKind

logger = logging.getLogger("spinbath")


def mode_spectrum(spec: ChainSpec) -> List[ModeBlock]:
    """Uniform grid k_n = 2 pi n / N with coupling J / sqrt(N) to every mode."""
    n = spec.n_bath
    g = spec.j_coupling / math.sqrt(n)
    blocks = []
    for index in range(n):
        k = 2.0 * math.pi * index / n
        energy = spec.v_coupling if spec.model is ModelKind.ISING else spec.v_coupling * math.cos(k)
        blocks.append(ModeBlock(energy=energy, g=g, k=k, index=index))
    return blocks


def open_chain_modes(spec: ChainSpec) -> List[ModeBlock]:
    """
    Single-particle modes of an open XX chain as seen from its end spin.

    theta_m = m pi / (N + 1); the end spin has amplitude sqrt(2/(N+1)) sin(theta_m) in mode m.
    """
    if spec.model is not ModelKind.XX:
        raise ConfigError("open-chain modes are defined for the XX bath only")
    n = spec.n_bath
    scale = spec.j_coupling * math.sqrt(2.0 / (n + 1))
    blocks = []
    for m in range(1, n + 1):
        theta = m * math.pi / (n + 1)
        blocks.append(ModeBlock(energy=spec.v_coupling * math.cos(theta),
                                g=scale * math.sin(theta), k=theta, index=m - 1))
    return blocks


def modes_for(spec: ChainSpec) -> List[ModeBlock]:
    """
    Mode set that reproduces the chain's O(J^2) dynamics: end-spin modes for an open XX
    chain, the uniform grid otherwise (model 1 is a flat band).
    """
    if spec.model is ModelKind.XX and spec.boundary is Boundary.OPEN:
        return open_chain_modes(spec)
    return mode_spectrum(spec)


def _mode_arrays(blocks: Sequence[ModeBlock]):
    ordered = sorted(blocks, key=lambda b: b.index)
    energies = np.array([b.energy for b in ordered], dtype=float)
    couplings = np.array([b.g for b in ordered], dtype=float)
    return energies, couplings


def _static_factors(energies: np.ndarray, couplings: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(n_times, n_modes) exact per-mode factors."""
    omega2 = energies ** 2 + couplings ** 2
    coupled = couplings > 0.0
    safe = np.where(coupled, omega2, 1.0)
    phase = np.sqrt(safe) * t.reshape(-1, 1)
    factors = 1.0 - 2.0 * couplings ** 2 * np.sin(phase) ** 2 / safe
    return np.where(coupled, factors, 1.0)


def mode_trace_static(block: ModeBlock, t: ArrayLike) -> ArrayLike:
    """1 - 2 g^2 sin^2(sqrt(E^2 + g^2) t) / (E^2 + g^2)."""
    t = np.asarray(t, dtype=float)
    factors = _static_factors(np.array([block.energy]), np.array([block.g]), t)
    return scalar_or_array(factors[:, 0].reshape(t.shape))


def kappa_product(blocks: Sequence[ModeBlock], t: ArrayLike) -> ArrayLike:
    """Product of the exact per-mode factors, multiplied in mode-index order."""
    t = np.asarray(t, dtype=float)
    energies, couplings = _mode_arrays(blocks)
    factors = _static_factors(energies, couplings, t)
    return scalar_or_array(np.prod(factors, axis=1).reshape(t.shape))


def kappa_reduced(blocks: Sequence[ModeBlock], t: ArrayLike) -> ArrayLike:
    """exp(-sum 2 g^2 sin^2(E t) / E^2), the large-N form of the product (E = 0 by its limit)."""
    t = np.asarray(t, dtype=float)
    energies, couplings = _mode_arrays(blocks)
    flat = t.reshape(-1, 1)
    exponent = np.sum(2.0 * couplings ** 2 * flat ** 2 * np.sinc(energies * flat / np.pi) ** 2, axis=1)
    return scalar_or_array(np.exp(-exponent).reshape(t.shape))


def commutator_error_estimate(J: float, t: ArrayLike, N: int) -> ArrayLike:
    """Leading size J^4 t^4 (N-1)/N of the neglected inter-mode commutators."""
    t = np.asarray(t, dtype=float)
    return scalar_or_array(J ** 4 * t ** 4 * (N - 1) / N)


def adiabatic_mode_factor(block: ModeBlock) -> float:
    """
    Per-mode factor left after a slow switch-off from coupling g = block.g:
    the overlap |E| / sqrt(E^2 + g^2) of the two sectors' adiabatically followed states.
    """
    if block.g == 0.0:
        return 1.0
    return abs(block.energy) / math.sqrt(block.energy ** 2 + block.g ** 2)


def adiabatic_plateau(blocks: Sequence[ModeBlock]) -> float:
    ordered = sorted(blocks, key=lambda b: b.index)
    return float(np.prod([adiabatic_mode_factor(b) for b in ordered]))
