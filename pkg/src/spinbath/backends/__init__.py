from typing import Union

from ..core import ConfigError
from ..schema import Provenance
from .base import BaseBackend
from .closed_form import ClosedFormBackend, IntegralLimitBackend
from .exact import ExactEDBackend
from .modes import FreeFermionBackend, TimeDependentBackend

__all__ = [
    "BaseBackend",
    "ExactEDBackend",
    "ClosedFormBackend",
    "IntegralLimitBackend",
    "FreeFermionBackend",
    "TimeDependentBackend",
    "BACKEND_REGISTRY",
    "get_backend",
]

BACKEND_REGISTRY = {
    Provenance.EXACT_ED: ExactEDBackend,
    Provenance.FREE_FERMION: FreeFermionBackend,
    Provenance.CLOSED_FORM: ClosedFormBackend,
    Provenance.INTEGRAL_LIMIT: IntegralLimitBackend,
    Provenance.TIME_DEPENDENT: TimeDependentBackend,
}


def get_backend(name: Union[str, Provenance], **kwargs) -> BaseBackend:
    """Instantiate a backend by provenance name, e.g. "exact-ed"."""
    try:
        provenance = Provenance(name)
    except ValueError:
        provenance = None

    backend_class = BACKEND_REGISTRY.get(provenance)
    if not backend_class:
        raise ConfigError(f"Unknown backend: '{name}'. Available: {[p.value for p in BACKEND_REGISTRY]}")

    try:
        return backend_class(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"Bad arguments for backend '{provenance.value}': {exc}") from exc
