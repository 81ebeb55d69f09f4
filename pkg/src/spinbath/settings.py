import json
import logging
import os
from typing import Any, Dict

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from .core import ConfigError
from .schema import Provenance

load_dotenv()


class Settings(BaseModel):
    """
    Process-level knobs read from the environment (and a .env file, if present).
    Run parameters themselves come from the command line.
    """
    log_level: str = "INFO"
    workers: int = Field(default=4, ge=1)
    step_tolerance: float = Field(default=1e-10, gt=0.0)
    quad_tolerance: float = Field(default=1e-11, gt=0.0)
    validate_tolerance: float = Field(default=1e-3, ge=0.0)
    backend_args: Dict[str, Dict[str, Any]] = Field(default_factory=dict)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown log level '{value}'")
        return value

    @classmethod
    def from_env(cls) -> "Settings":
        try:
            backend_args = json.loads(os.getenv("SPINBATH_BACKEND_ARGS", "{}"))
            return cls(
                log_level=os.getenv("SPINBATH_LOG_LEVEL", "INFO").upper(),
                workers=os.getenv("SPINBATH_WORKERS", 4),
                step_tolerance=os.getenv("SPINBATH_STEP_TOLERANCE", 1e-10),
                quad_tolerance=os.getenv("SPINBATH_QUAD_TOLERANCE", 1e-11),
                validate_tolerance=os.getenv("SPINBATH_VALIDATE_TOLERANCE", 1e-3),
                backend_args=backend_args,
            )
        except (ValueError, ValidationError) as exc:
            raise ConfigError(f"Invalid SPINBATH_* environment setting: {exc}") from exc

    def backend_kwargs(self, provenance: Provenance) -> Dict[str, Any]:
        """Constructor arguments for one backend: tolerances first, then SPINBATH_BACKEND_ARGS."""
        kwargs: Dict[str, Any] = {}
        if provenance in (Provenance.EXACT_ED, Provenance.TIME_DEPENDENT):
            kwargs["step_tolerance"] = self.step_tolerance
        if provenance is Provenance.INTEGRAL_LIMIT:
            kwargs["quad_tolerance"] = self.quad_tolerance
        kwargs.update(self.backend_args.get(provenance.value, {}))
        return kwargs
