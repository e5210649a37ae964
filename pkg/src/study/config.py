"""
Study Configuration

Pydantic models for a convergence study (test vector, dimension, radius
sweep, quadrature grid, output) plus library-wide numerical settings. A
study can come from a YAML file, from CLI flags, or both (flags win).
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..core.errors import StudyConfigError
from ..quadrature.disk import DEFAULT_GRID, DiskGrid
from .vectors import validate_vector_spec

DEFAULT_RADII = (1.0, 2.0, 4.0, 8.0)
_RADIUS_CHOICES = {"radii": "sweep", "sweep": "radii"}


class LibrarySettings(BaseSettings):
    """Numerical defaults; each can be overridden by a CRES_* environment variable."""

    model_config = SettingsConfigDict(env_prefix="CRES_")

    default_grid: str = Field(DEFAULT_GRID, description="Polar grid used when none is given")
    bisection_steps: int = Field(40, ge=1, description="Bisection steps in the radius search")
    log_level: str = Field("INFO", description="Root log level for the CLI")


class GeometricSweep(BaseModel):
    """Radii start, start*factor, ..., count values."""

    start: float = Field(..., gt=0, description="First radius")
    factor: float = Field(..., gt=1, description="Ratio between consecutive radii")
    count: int = Field(..., ge=1, description="Number of radii")

    def radii(self) -> List[float]:
        return [self.start * self.factor ** i for i in range(self.count)]


class OutputSpec(BaseModel):
    path: Optional[str] = Field(None, description="Output file; stdout when absent")
    format: Literal["csv", "json"] = Field("csv", description="Report format")


class StudyConfig(BaseModel):
    """Everything that determines a study's output."""

    model_config = ConfigDict(extra="forbid")

    vector: str = Field(..., description="fock <m> | coherent <re>,<im> | geometric <q> | file <path>")
    dim: int = Field(64, ge=1, description="Truncation dimension N+1")
    radii: Optional[List[float]] = Field(None, description="Explicit increasing radii")
    sweep: Optional[GeometricSweep] = Field(None, description="Geometric radius sweep")
    grid: str = Field(DEFAULT_GRID, description="Polar grid KxL for quadrature comparison")
    output: OutputSpec = Field(default_factory=OutputSpec)
    seed: int = Field(0, description="Seed for randomized bra vectors")
    quadrature: bool = Field(False, description="Also compare against disk quadrature")
    max_m: Optional[int] = Field(None, ge=0, description="Norm-witness horizon; per-radius default")
    workers: int = Field(1, ge=1, description="Threads for the radius sweep")

    @field_validator("vector")
    @classmethod
    def validate_vector(cls, v):
        try:
            validate_vector_spec(v)
        except StudyConfigError as e:
            raise ValueError(str(e)) from e
        return v.strip()

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("radii must not be empty")
        if any(r <= 0 for r in v):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("radii must be strictly increasing")
        return v

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v):
        DiskGrid.parse(1.0, v)
        return v

    @model_validator(mode="after")
    def check_sweep_choice(self):
        if self.radii is not None and self.sweep is not None:
            raise ValueError("give either radii or sweep, not both")
        return self

    def resolved_radii(self) -> List[float]:
        if self.sweep is not None:
            return self.sweep.radii()
        if self.radii is not None:
            return list(self.radii)
        return list(DEFAULT_RADII)


def build_study_config(data: Dict[str, Any]) -> StudyConfig:
    try:
        return StudyConfig.model_validate(data)
    except ValidationError as e:
        raise StudyConfigError(f"Invalid study configuration: {e}") from e


def load_study_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> StudyConfig:
    """Read a YAML study file; non-None overrides replace its keys (radii and sweep replace each other)."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise StudyConfigError(f"Cannot read config file {path}: {e}") from e
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise StudyConfigError(f"Config file {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise StudyConfigError(f"Config file {path} must hold a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
            if key in _RADIUS_CHOICES:
                data.pop(_RADIUS_CHOICES[key], None)
    return build_study_config(data)
