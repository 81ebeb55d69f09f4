__version__ = "0.1.0"

from .analytic import (
    band_average,
    hyp1f2_special,
    kappa_model1_exact,
    kappa_model1_limit,
    kappa_model2_finiteN,
    kappa_model2_integral,
)
from .core import ConfigError, ConvergenceError, NumericalError, SpinBathError, apply_kappa, eval_coupling
from .ed_oracle import build_block_hamiltonians, kappa_ed_static, kappa_ed_timedep
from .freefermion import kappa_product, mode_spectrum, mode_trace_static
from .schema import (
    BathState,
    ChainSpec,
    CouplingSchedule,
    DecoherenceSeries,
    ModelKind,
    Provenance,
    QubitState,
    ScheduleKind,
    TimeGrid,
)
from .timedep import integrate_mode, kappa_timedep, recoherence_experiment

__all__ = [
    "__version__",
    "SpinBathError",
    "ConfigError",
    "NumericalError",
    "ConvergenceError",
    "ChainSpec",
    "CouplingSchedule",
    "TimeGrid",
    "DecoherenceSeries",
    "QubitState",
    "BathState",
    "ModelKind",
    "ScheduleKind",
    "Provenance",
    "eval_coupling",
    "apply_kappa",
    "build_block_hamiltonians",
    "kappa_ed_static",
    "kappa_ed_timedep",
    "kappa_model1_exact",
    "kappa_model1_limit",
    "kappa_model2_finiteN",
    "kappa_model2_integral",
    "hyp1f2_special",
    "band_average",
    "mode_spectrum",
    "mode_trace_static",
    "kappa_product",
    "integrate_mode",
    "kappa_timedep",
    "recoherence_experiment",
]
