"""Pydantic schemas for experiment configuration and run reports."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError

ComplexPair = tuple[float, float]

SUBCOMMANDS = (
    "clifford",
    "revolve",
    "potential",
    "spectrum1d",
    "spectrum2d",
    "willmore",
    "kruskal",
    "dual",
    "cmc-curve",
    "isothermic-pencil",
    "s3-spectrum",
    "moebius",
    "verify",
)


def to_complex(pair: ComplexPair | float) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    return complex(pair[0], pair[1])


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


# =============================================================================
# Experiment configuration
# =============================================================================


class LatticeSpec(_Section):
    """Lattice of the potential for ``spectrum2d`` and ``potential``."""
    kind: Literal["square", "hexagonal", "custom"] = "square"
    side: float = Field(1.0, gt=0, description="Side length of square and hexagonal lattices")
    gamma1: ComplexPair = (1.0, 0.0)
    gamma2: ComplexPair = (0.0, 1.0)


class GridSpec(_Section):
    n1: int = Field(64, description="Samples along the first generator")
    n2: int = Field(64, description="Samples along the second generator")

    @field_validator("n1", "n2")
    @classmethod
    def validate_size(cls, v: int) -> int:
        """Validate grid sizes are even and at least 8."""
        if v < 8 or v % 2:
            raise ValueError(f"grid size must be even and >= 8, got {v}")
        return v


class SurfaceSpec(_Section):
    kind: Literal["clifford", "revolution", "plane", "mesh", "flat-s3"] = "revolution"
    R: float = Field(2.0, gt=0, description="Center circle radius of a torus of revolution")
    r: float = Field(1.0, gt=0, description="Tube radius of a torus of revolution")
    angle: float = Field(np.pi / 4.0, gt=0, lt=np.pi / 2.0, description="Radius angle of a flat torus in S3")
    mesh_file: str | None = Field(None, description="OBJ file written by the exporter")

    @model_validator(mode="after")
    def validate_surface(self) -> SurfaceSpec:
        """Validate the parameters the chosen surface needs."""
        if self.kind == "revolution" and not self.R > self.r:
            raise ValueError(f"torus of revolution needs R > r, got R={self.R}, r={self.r}")
        if self.kind == "mesh":
            if self.mesh_file is None:
                raise ValueError("surface kind 'mesh' needs mesh_file")
            if not Path(self.mesh_file).is_file():
                raise ValueError(f"mesh file {self.mesh_file} does not exist")
        return self


class PotentialSpec(_Section):
    kind: Literal["zero", "constant", "one_dim", "from_surface", "field_file"] = "zero"
    value: ComplexPair = (0.0, 0.0)
    samples: list[float] | None = Field(None, description="Samples of a potential depending on x only")
    period: float = Field(2.0 * np.pi, gt=0, description="Period of a one-dimensional potential")
    field_file: str | None = Field(None, description="Field JSON written by the potential subcommand")

    @model_validator(mode="after")
    def validate_samples(self) -> PotentialSpec:
        """Validate the samples or the file the chosen potential needs."""
        if self.kind == "one_dim":
            if not self.samples or len(self.samples) < 4 or len(self.samples) % 2:
                raise ValueError("one_dim potentials need an even number (>= 4) of samples")
        if self.kind == "field_file":
            if self.field_file is None:
                raise ValueError("potential kind 'field_file' needs field_file")
            if not Path(self.field_file).is_file():
                raise ValueError(f"field file {self.field_file} does not exist")
        return self


class ScanSpec(_Section):
    cutoff: int = Field(4, ge=1, description="Fourier cutoff M")
    plane: Literal["lambda", "w"] = "lambda"
    fixed: ComplexPair = (0.0, 0.0)
    center: ComplexPair = (0.0, 0.0)
    half_widths: tuple[float, float] = (4.0, 4.0)
    points: int = Field(41, ge=3)
    zero_factor: float = Field(1e-6, gt=0)
    witness: Literal["smallest", "resonance"] = "smallest"
    region: tuple[float, float, float, float] = (-1.2, 1.2, -1.5, 1.5)
    box_width: float = Field(1e-3, gt=0)
    budget: int = Field(4000, ge=1)
    branch_radii: tuple[float, float] = (2.0, 6.0)
    branch_points: int = Field(25, ge=2)


class LaxSpec(_Section):
    amplitude: float = Field(0.5, gt=0, description="u(0) of the sinh-Gordon profile")
    lambdas: list[ComplexPair] = Field(default_factory=lambda: [(1.0, 0.0), (0.0, 1.0), (2.0, 0.0)])


class MoebiusSpec(_Section):
    center: tuple[float, float, float] = (0.0, 0.0, 3.0)
    radius: float = Field(1.0, gt=0)
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = Field(1.0, gt=0)


class OutputSpec(_Section):
    directory: str = "out"
    include_timing: bool = False


class ExperimentConfig(_Section):
    """One experiment; every section has builtin defaults."""

    lattice: LatticeSpec = Field(default_factory=LatticeSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    surface: SurfaceSpec = Field(default_factory=SurfaceSpec)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    scan: ScanSpec = Field(default_factory=ScanSpec)
    lax: LaxSpec = Field(default_factory=LaxSpec)
    moebius: MoebiusSpec = Field(default_factory=MoebiusSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    kruskal_count: int = Field(3, ge=1, le=3)
    seed: int = 0

    @classmethod
    def load(cls, path: str | Path | None = None, overrides: list[str] | None = None) -> ExperimentConfig:
        """Defaults, then the JSON file, then ``key=value`` overrides with dotted keys.

        Raises:
            ConfigError: unreadable file, malformed override or failed validation
        """
        data: dict[str, Any] = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}", code="CONFIG_UNREADABLE") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}", code="CONFIG_NOT_JSON") from exc
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object", code="CONFIG_NOT_OBJECT")
        for item in overrides or []:
            apply_override(data, item)
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration: {exc}", code="CONFIG_INVALID") from exc

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def apply_override(data: dict[str, Any], item: str) -> None:
    """Set a dotted key from ``key=value``; the value is parsed as JSON, else kept as a string."""
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {item!r} is not of the form key=value", code="BAD_OVERRIDE")
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = data
    parts = key.split(".")
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {key!r} descends into a non-object", code="BAD_OVERRIDE")
        node = child
    node[parts[-1]] = value


# =============================================================================
# Run reports
# =============================================================================


class CheckResult(BaseModel):
    """One residual compared with its tolerance."""
    name: str
    value: float | None
    tolerance: float
    passed: bool
    hard: bool = True


class RunReport(BaseModel):
    """Everything a subcommand computed, in JSON-ready form."""
    subcommand: str
    config: dict[str, Any]
    checks: list[CheckResult] = Field(default_factory=list)
    results: dict[str, Any] = Field(default_factory=dict)
    tables: list[str] = Field(default_factory=list)
    versions: dict[str, str] = Field(default_factory=dict)
    timing: float | None = None

    def check(self, name: str, value: float | None, tolerance: float, hard: bool = True) -> bool:
        """Record ``value <= tolerance``; a missing or non-finite value fails."""
        passed = value is not None and bool(np.isfinite(value)) and value <= tolerance
        self.checks.append(
            CheckResult(
                name=name,
                value=None if value is None or not np.isfinite(value) else float(value),
                tolerance=tolerance,
                passed=passed,
                hard=hard,
            )
        )
        return passed

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.hard and not c.passed]
