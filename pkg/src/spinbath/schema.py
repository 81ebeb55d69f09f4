import math
from enum import Enum
from pathlib import Path
from typing import FrozenSet, List, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Numerical slack allowed on |kappa| <= 1 before a sample counts as a failure.
EPS_NUM = 1e-9
UNITARITY_TOL = 1e-9


class ModelKind(str, Enum):
    """Bath model: Ising-coupled chain (model 1) or XX hopping chain (model 2)."""
    ISING = "ising"
    XX = "xx"


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    SWITCH_OFF = "switch-off"
    SWITCH_OFF_ON = "switch-off-on"


class Provenance(str, Enum):
    """Which evaluation path produced a decoherence series."""
    EXACT_ED = "exact-ed"
    FREE_FERMION = "free-fermion"
    CLOSED_FORM = "closed-form"
    INTEGRAL_LIMIT = "integral-limit"
    TIME_DEPENDENT = "time-dependent"


class Sector(int, Enum):
    """Eigenvalue of the qubit's tau^y selecting a block Hamiltonian."""
    PLUS = 1
    MINUS = -1


class BathKind(str, Enum):
    FULLY_MIXED = "fully-mixed"
    PRODUCT_PURE = "product-pure"


class SeriesMethod(str, Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"


class Subcommand(str, Enum):
    STATIC = "static"
    TIMEDEP = "timedep"
    VALIDATE = "validate"
    FIGURES = "figures"


class ChainSpec(BaseModel):
    """
    Qubit plus chain: which bath model, how many bath spins, and the couplings.
    J couples the qubit to bath spin 0, V couples neighbouring bath spins.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    model: ModelKind = ModelKind.ISING
    n_bath: int = Field(ge=2, description="Number of bath spins N.")
    j_coupling: float = Field(default=0.0, ge=0.0)
    v_coupling: float = Field(default=1.0, gt=0.0)
    boundary: Boundary = Boundary.OPEN

    def with_coupling(self, j_coupling: float) -> "ChainSpec":
        return ChainSpec(**{**self.model_dump(), "j_coupling": j_coupling})

    def with_size(self, n_bath: int) -> "ChainSpec":
        return ChainSpec(**{**self.model_dump(), "n_bath": n_bath})

    def describe(self) -> str:
        return (f"model={self.model.value} N={self.n_bath} J={self.j_coupling!r} "
                f"V={self.v_coupling!r} boundary={self.boundary.value}")


class CouplingSchedule(BaseModel):
    """Time profile J(t) of the qubit-bath coupling."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: ScheduleKind = ScheduleKind.CONSTANT
    j0: float = Field(ge=0.0)
    rate: float = Field(default=1.0, gt=0.0)
    t_off: float = 0.0
    t_on: Optional[float] = None

    @model_validator(mode="after")
    def _check_ramps(self) -> "CouplingSchedule":
        if self.kind is ScheduleKind.SWITCH_OFF_ON:
            if self.t_on is None:
                raise ValueError("switch-off-on schedule needs t_on")
            if self.t_on <= self.t_off:
                raise ValueError(f"t_on ({self.t_on}) must come after t_off ({self.t_off})")
            # coupling must actually reach ~0 between the two ramps
            if (self.t_on - self.t_off) * self.rate < 10.0:
                raise ValueError(
                    f"(t_on - t_off) * rate = {(self.t_on - self.t_off) * self.rate:.3g} < 10")
        return self

    def describe(self) -> str:
        text = f"{self.kind.value}(j0={self.j0!r}"
        if self.kind is not ScheduleKind.CONSTANT:
            text += f", rate={self.rate!r}, t_off={self.t_off!r}"
        if self.kind is ScheduleKind.SWITCH_OFF_ON:
            text += f", t_on={self.t_on!r}"
        return text + ")"


class TimeGrid(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    t_start: float = 0.0
    t_end: float
    n_samples: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_order(self) -> "TimeGrid":
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        return self

    def times(self) -> np.ndarray:
        """Uniform samples, both endpoints included."""
        return np.linspace(self.t_start, self.t_end, self.n_samples)

    @property
    def spacing(self) -> float:
        return (self.t_end - self.t_start) / (self.n_samples - 1)


class DecoherenceSeries(BaseModel):
    """kappa(t) sampled on a grid, with the inputs that produced it."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: TimeGrid
    values: np.ndarray
    provenance: Provenance
    spec_echo: ChainSpec
    schedule_echo: Optional[CouplingSchedule] = None

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex_array(cls, values) -> np.ndarray:
        array = np.array(values, dtype=complex).reshape(-1)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_samples(self) -> "DecoherenceSeries":
        if self.values.shape[0] != self.grid.n_samples:
            raise ValueError(f"{self.values.shape[0]} values for {self.grid.n_samples} grid samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("kappa contains non-finite samples")
        worst = float(np.max(np.abs(self.values)))
        if worst > 1.0 + EPS_NUM:
            raise ValueError(f"|kappa| reaches {worst!r} > 1 + {EPS_NUM}")
        return self

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()


class QubitState(BaseModel):
    """Reduced density matrix [[rho11, rho12], [conj(rho12), rho22]] of the central qubit."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    rho11: float = Field(ge=0.0, le=1.0)
    rho22: float = Field(ge=0.0, le=1.0)
    rho12: complex = 0j

    @model_validator(mode="after")
    def _check_density_matrix(self) -> "QubitState":
        if abs(self.rho11 + self.rho22 - 1.0) > 1e-12:
            raise ValueError(f"trace {self.rho11 + self.rho22!r} != 1")
        if abs(self.rho12) ** 2 > self.rho11 * self.rho22 + 1e-12:
            raise ValueError("|rho12|^2 exceeds rho11*rho22; state is not positive")
        return self

    @classmethod
    def from_amplitudes(cls, a: complex, b: complex) -> "QubitState":
        """Pure qubit state a|up> + b|down>, normalised."""
        norm = abs(a) ** 2 + abs(b) ** 2
        if norm == 0.0:
            raise ValueError("zero amplitude vector")
        a, b = complex(a) / math.sqrt(norm), complex(b) / math.sqrt(norm)
        rho11 = abs(a) ** 2
        return cls(rho11=rho11, rho22=1.0 - rho11, rho12=a * b.conjugate())

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12],
                         [self.rho12.conjugate(), self.rho22]], dtype=complex)

    @property
    def coherence(self) -> float:
        return abs(self.rho12)

    @property
    def purity(self) -> float:
        return self.rho11 ** 2 + self.rho22 ** 2 + 2.0 * abs(self.rho12) ** 2


class BlockHamiltonian(BaseModel):
    """Bath Hamiltonian conditioned on tau^y = sign, as a sparse matrix on 2^N states."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sign: Sector
    entries: sp.csr_matrix

    @model_validator(mode="after")
    def _check_block(self) -> "BlockHamiltonian":
        rows, cols = self.entries.shape
        n_bath = int(round(math.log2(rows))) if rows > 0 else 0
        if rows != cols or 2 ** n_bath != rows:
            raise ValueError(f"block shape {self.entries.shape} is not 2^N x 2^N")
        asymmetry = abs(self.entries - self.entries.conj().T)
        if asymmetry.nnz and asymmetry.max() > 1e-12:
            raise ValueError("block Hamiltonian is not Hermitian")
        if self.entries.nnz > (n_bath + 1) * rows:
            raise ValueError(f"{self.entries.nnz} stored entries exceed (N+1)*2^N")
        return self

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def n_bath(self) -> int:
        return int(round(math.log2(self.dimension)))

    def dense(self) -> np.ndarray:
        return self.entries.toarray()


class BathState(BaseModel):
    """Initial bath state: fully mixed, or a normalised pure vector (exact diagonalization only)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: BathKind = BathKind.FULLY_MIXED
    n_bath: int = Field(ge=1)
    amplitudes: Optional[np.ndarray] = None

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_vector(cls, amplitudes):
        if amplitudes is None:
            return None
        vector = np.array(amplitudes, dtype=complex).reshape(-1)
        vector.flags.writeable = False
        return vector

    @model_validator(mode="after")
    def _check_amplitudes(self) -> "BathState":
        if self.kind is BathKind.FULLY_MIXED:
            if self.amplitudes is not None:
                raise ValueError("a fully mixed bath carries no amplitudes")
            return self
        if self.amplitudes is None:
            raise ValueError("a pure bath state needs amplitudes")
        if self.amplitudes.shape[0] != 2 ** self.n_bath:
            raise ValueError(f"{self.amplitudes.shape[0]} amplitudes for {self.n_bath} spins")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes have norm {norm!r}")
        return self

    @classmethod
    def fully_mixed(cls, n_bath: int) -> "BathState":
        return cls(kind=BathKind.FULLY_MIXED, n_bath=n_bath)

    @classmethod
    def product(cls, spins: List[int]) -> "BathState":
        """
        Product of sigma^z eigenstates.

        Args:
            spins: +1 (up) or -1 (down) for bath spins 0..N-1. Up is bit value 0.
        """
        if any(s not in (1, -1) for s in spins):
            raise ValueError(f"spins must be +1 or -1, got {spins}")
        index = sum(1 << i for i, s in enumerate(spins) if s == -1)
        vector = np.zeros(2 ** len(spins), dtype=complex)
        vector[index] = 1.0
        return cls(kind=BathKind.PRODUCT_PURE, n_bath=len(spins), amplitudes=vector)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "BathState":
        vector = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n_bath = int(round(math.log2(vector.shape[0]))) if vector.shape[0] > 0 else 0
        return cls(kind=BathKind.PRODUCT_PURE, n_bath=max(n_bath, 1), amplitudes=vector)


class Hyp1F2Result(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    value: float
    method: SeriesMethod
    est_error: float = Field(ge=0.0)
    terms: int = 0


class ModeBlock(BaseModel):
    """One free-fermion mode: level splitting 2E and coupling g to the qubit."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    energy: float
    g: float = Field(ge=0.0)
    k: float
    index: int = Field(default=0, ge=0)


class ModePropagatorState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_plus: np.ndarray
    u_minus: np.ndarray
    t: float

    @model_validator(mode="after")
    def _check_unitary(self) -> "ModePropagatorState":
        eye = np.eye(2)
        for name, u in (("u_plus", self.u_plus), ("u_minus", self.u_minus)):
            if u.shape != (2, 2):
                raise ValueError(f"{name} has shape {u.shape}")
            defect = float(np.max(np.abs(u.conj().T @ u - eye)))
            if defect > UNITARITY_TOL:
                raise ValueError(f"{name} unitarity defect {defect:.3g} at t={self.t!r}")
        return self

    @property
    def factor(self) -> complex:
        """Per-mode decoherence factor tr(u_minus^dagger u_plus) / 2."""
        return complex(0.5 * np.trace(self.u_minus.conj().T @ self.u_plus))


class RecoherenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kappa_initial_envelope: float
    kappa_off_plateau: float
    kappa_final_envelope: float


class PlateauExtrapolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    sizes: List[int]
    plateaus: List[float]
    limit: float


class InvariantCheck(BaseModel):
    """One line of a validation report."""
    model_config = ConfigDict(frozen=True)

    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def to_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"INVARIANT {self.name} {self.deviation:.6e} {self.tolerance:.6e} {status}"


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    spec: ChainSpec
    schedule: Optional[CouplingSchedule] = None
    grid: TimeGrid
    backends: FrozenSet[Provenance] = Field(default_factory=frozenset)
    output_path: Path = Path("out")
    seed: int = Field(default=0, ge=0)
    tolerance: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode="after")
    def _check_subcommand(self) -> "RunConfig":
        if self.subcommand is Subcommand.TIMEDEP and self.schedule is None:
            raise ValueError("timedep runs need a coupling schedule (--schedule)")
        if self.subcommand is Subcommand.VALIDATE and len(self.backends) < 2:
            raise ValueError("validate needs at least two backends (--backend, repeatable)")
        return self

    def ordered_backends(self) -> List[Provenance]:
        order = list(Provenance)
        return sorted(self.backends, key=order.index)
