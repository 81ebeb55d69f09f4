"""
Exact diagonalization of the qubit-plus-chain problem.

The qubit enters only through tau^y, so the full Hamiltonian splits into two bath
Hamiltonians H+- = +-J sigma_0^y + H_bath acting on the 2^N bath states. Basis index bit i
holds bath spin i, with bit value 0 meaning sigma^z = +1.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .core import ConfigError, NumericalError, build_series
from .propagator import MagnusIntegrator, unitarity_defect
from .schema import (
    UNITARITY_TOL,
    BathKind,
    BathState,
    BlockHamiltonian,
    Boundary,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    ModelKind,
    Provenance,
    Sector,
    TimeGrid,
)

logger = logging.getLogger("spinbath")

MAX_STATIC_SPINS = 14
MAX_DYNAMIC_SPINS = 10

SIGMA_Y = sp.csr_matrix(np.array([[0.0, -1.0j], [1.0j, 0.0]]))
SIGMA_Z = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
SIGMA_PLUS = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))  # |up><down|
SIGMA_MINUS = sp.csr_matrix(SIGMA_PLUS.T)


def _guard(n_bath: int, limit: int, what: str) -> None:
    if n_bath > limit:
        raise ConfigError(f"{what} is limited to N <= {limit} bath spins (got N={n_bath}); "
                          f"use a free-fermion or closed-form backend for larger chains")


def site_operator(op: sp.spmatrix, site: int, n_bath: int) -> sp.csr_matrix:
    """Embed a single-site operator so that it acts on bit ``site`` of the basis index."""
    left = sp.identity(2 ** (n_bath - site - 1), dtype=complex, format="csr")
    right = sp.identity(2 ** site, dtype=complex, format="csr")
    return sp.csr_matrix(sp.kron(sp.kron(left, op, format="csr"), right, format="csr"))


def chain_bonds(spec: ChainSpec) -> List[Tuple[int, int]]:
    """Nearest-neighbour bonds; the ring closes only when it adds a new bond (N >= 3)."""
    bonds = [(i, i + 1) for i in range(spec.n_bath - 1)]
    if spec.boundary is Boundary.PERIODIC and spec.n_bath >= 3:
        bonds.append((spec.n_bath - 1, 0))
    return bonds


def bath_hamiltonian(spec: ChainSpec) -> sp.csr_matrix:
    n = spec.n_bath
    hamiltonian = sp.csr_matrix((2 ** n, 2 ** n), dtype=complex)
    for i, j in chain_bonds(spec):
        if spec.model is ModelKind.ISING:
            term = site_operator(SIGMA_Z, i, n) @ site_operator(SIGMA_Z, j, n)
        elif spec.model is ModelKind.XX:
            hop = site_operator(SIGMA_PLUS, i, n) @ site_operator(SIGMA_MINUS, j, n)
            term = hop + hop.conj().T
        else:
            raise ConfigError(f"Unknown model kind: {spec.model!r}")
        hamiltonian = hamiltonian + spec.v_coupling * term
    hamiltonian = sp.csr_matrix(hamiltonian)
    hamiltonian.eliminate_zeros()
    return hamiltonian


def coupling_operator(n_bath: int) -> sp.csr_matrix:
    """sigma^y on bath spin 0, the spin the qubit talks to."""
    return site_operator(SIGMA_Y, 0, n_bath)


def _block(sign: Sector, matrix: sp.spmatrix) -> BlockHamiltonian:
    entries = sp.csr_matrix(matrix)
    entries.eliminate_zeros()
    return BlockHamiltonian(sign=sign, entries=entries)


def build_block_hamiltonians(spec: ChainSpec) -> Tuple[BlockHamiltonian, BlockHamiltonian]:
    """H+ and H- for the tau^y = +1 and -1 sectors."""
    _guard(spec.n_bath, MAX_STATIC_SPINS, "exact diagonalization")
    bath = bath_hamiltonian(spec)
    coupling = spec.j_coupling * coupling_operator(spec.n_bath)
    return _block(Sector.PLUS, bath + coupling), _block(Sector.MINUS, bath - coupling)


def _check_bath(spec: ChainSpec, bath: BathState) -> None:
    if bath.n_bath != spec.n_bath:
        raise ConfigError(f"bath state has {bath.n_bath} spins, chain has {spec.n_bath}")


def kappa_ed_static(spec: ChainSpec,
                    bath: Optional[BathState] = None,
                    grid: Optional[TimeGrid] = None) -> DecoherenceSeries:
    """
    kappa(t) = tr(e^{-iH+ t} rho_b e^{+iH- t}) from dense eigendecompositions of H+-.

    Args:
        spec: chain parameters, N <= 14.
        bath: initial bath state; fully mixed when omitted.
        grid: sample times.
    """
    _guard(spec.n_bath, MAX_STATIC_SPINS, "exact diagonalization")
    if grid is None:
        raise ConfigError("kappa_ed_static needs a time grid")
    bath = bath or BathState.fully_mixed(spec.n_bath)
    _check_bath(spec, bath)
    times = grid.times()

    if spec.j_coupling == 0.0:
        return build_series(grid, np.ones(times.shape, dtype=complex), Provenance.EXACT_ED, spec)

    plus, minus = build_block_hamiltonians(spec)
    lam_plus, w_plus = np.linalg.eigh(plus.dense())
    lam_minus, w_minus = np.linalg.eigh(minus.dense())
    forward = np.exp(-1j * np.outer(lam_plus, times))
    backward = np.exp(1j * np.outer(lam_minus, times))

    if bath.kind is BathKind.FULLY_MIXED:
        # |<a+|b->|^2 weights every pair of sector eigenstates
        overlap = np.abs(w_plus.conj().T @ w_minus) ** 2
        values = np.sum(forward * (overlap @ backward), axis=0) / plus.dimension
    else:
        psi = np.asarray(bath.amplitudes)
        evolved_plus = w_plus @ ((w_plus.conj().T @ psi)[:, None] * forward)
        evolved_minus = w_minus @ ((w_minus.conj().T @ psi)[:, None] * backward.conj())
        values = np.sum(evolved_minus.conj() * evolved_plus, axis=0)

    logger.debug(f"ED static {spec.describe()}: {plus.dimension} states, {grid.n_samples} samples")
    return build_series(grid, values, Provenance.EXACT_ED, spec)


def kappa_ed_timedep(spec: ChainSpec,
                     schedule: CouplingSchedule,
                     bath: Optional[BathState] = None,
                     grid: Optional[TimeGrid] = None,
                     tolerance: float = 1e-10) -> DecoherenceSeries:
    """
    kappa(t) = tr(U+(t) rho_b U-(t)^dagger) for a coupling J(t) taken from ``schedule``.

    Both sector propagators start as the identity at grid.t_start and are advanced together
    by the Magnus integrator. spec.j_coupling is not used; the schedule sets the coupling.
    """
    _guard(spec.n_bath, MAX_DYNAMIC_SPINS, "time-dependent exact diagonalization")
    if grid is None:
        raise ConfigError("kappa_ed_timedep needs a time grid")
    bath = bath or BathState.fully_mixed(spec.n_bath)
    _check_bath(spec, bath)
    times = grid.times()

    if schedule.j0 == 0.0:
        return build_series(grid, np.ones(times.shape, dtype=complex), Provenance.EXACT_ED, spec, schedule)

    bath_h = bath_hamiltonian(spec).toarray()
    sigma_y = coupling_operator(spec.n_bath).toarray()
    static = np.stack([bath_h, bath_h])
    coupling = np.stack([sigma_y, -sigma_y])

    dimension = bath_h.shape[0]
    if bath.kind is BathKind.FULLY_MIXED:
        initial = np.stack([np.eye(dimension, dtype=complex)] * 2)
        norm = float(dimension)
    else:
        ket = np.asarray(bath.amplitudes).reshape(dimension, 1)
        initial = np.stack([ket, ket])
        norm = 1.0

    integrator = MagnusIntegrator(static, coupling, schedule, tolerance=tolerance)
    values = np.empty(times.shape, dtype=complex)
    state = initial
    for i, (_, state) in enumerate(integrator.run(grid.t_start, times, initial)):
        values[i] = np.sum(np.conj(state[1]) * state[0]) / norm

    defect = unitarity_defect(state)
    if defect > UNITARITY_TOL:
        raise NumericalError(f"ED propagator unitarity defect {defect:.3g} at t={grid.t_end!r}")

    logger.debug(f"ED timedep {spec.describe()} {schedule.describe()}: "
                 f"{integrator.accepted} steps, {integrator.rejected} rejected")
    return build_series(grid, values, Provenance.EXACT_ED, spec, schedule)
