from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import (BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, TypeAdapter,
                      field_validator, model_validator)

from . import config
from .quadrature import SemicircleDensity, StaircaseDensity, TableDensity, UniformDensity
from .trace import FreeProductModel, MatrixModel, MeasureModel, SemicircularModel, TraceModel


def _fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12)
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"not a rational number: {value!r}") from exc


def _weight(value):
    if isinstance(value, str):
        return float(_fraction(value))
    return value


# "2/3" and 0.6666 are both accepted wherever a weight or mass is expected
Weight = Annotated[float, BeforeValidator(_weight)]
Rational = Annotated[Fraction, BeforeValidator(_fraction), PlainSerializer(str, when_used="json")]
Entry = Union[float, tuple[float, float]]
Matrix = list[list[Entry]]


def _to_array(rows: Matrix) -> np.ndarray:
    return np.array([[complex(*e) if isinstance(e, (tuple, list)) else complex(e) for e in row]
                     for row in rows], dtype=complex)


# Model specs

class BlockSpec(BaseModel):
    size: int = Field(ge=1)
    weight: Weight = Field(gt=0)


class MatrixModelSpec(BaseModel):
    type: Literal["matrix"] = "matrix"
    blocks: list[BlockSpec] = Field(min_length=1)
    generators: list[list[Matrix]] = Field(min_length=1)
    star: Optional[list[int]] = None
    b_algebra: Optional[list[list[Matrix]]] = None
    cap: Optional[int] = None

    @field_validator("star")
    @classmethod
    def star_is_one_based(cls, v):
        if v is not None and any(i < 1 for i in v):
            raise ValueError("star pairing uses generator numbers starting at 1")
        return v

    @model_validator(mode="after")
    def shapes_match(self):
        if self.star is not None and len(self.star) != len(self.generators):
            raise ValueError("star needs one entry per generator")
        for g, per_block in enumerate(self.generators):
            if len(per_block) != len(self.blocks):
                raise ValueError(f"generators[{g}] needs one matrix per block")
        return self

    def build(self) -> MatrixModel:
        star = None if self.star is None else [i - 1 for i in self.star]
        b_elements = None
        if self.b_algebra:
            b_elements = [[_to_array(m) for m in element] for element in self.b_algebra]
        return MatrixModel([(b.size, b.weight) for b in self.blocks],
                           [[_to_array(m) for m in per_block] for per_block in self.generators],
                           star=star, b_elements=b_elements, cap=self.cap)


class SemicircularModelSpec(BaseModel):
    type: Literal["semicircular"] = "semicircular"
    count: int = Field(1, ge=1)
    cap: Optional[int] = None

    def build(self) -> SemicircularModel:
        return SemicircularModel(self.count, cap=self.cap)


class SemicircleDensitySpec(BaseModel):
    kind: Literal["semicircle"] = "semicircle"
    center: float = 0.0
    radius: float = Field(2.0, gt=0)
    mass: Optional[Weight] = None

    def build(self, mass: float):
        return SemicircleDensity(self.center, self.radius, mass)


class UniformDensitySpec(BaseModel):
    kind: Literal["uniform"] = "uniform"
    a: float = 0.0
    b: float = 1.0
    mass: Optional[Weight] = None

    def build(self, mass: float):
        return UniformDensity(self.a, self.b, mass)


class TableDensitySpec(BaseModel):
    kind: Literal["table"] = "table"
    points: list[float] = Field(min_length=2)
    values: list[float] = Field(min_length=2)

    def build(self, mass: float):
        return TableDensity(self.points, self.values)


class StaircaseDensitySpec(BaseModel):
    kind: Literal["staircase"] = "staircase"
    levels: int = Field(40, ge=1)

    def build(self, mass: float):
        return StaircaseDensity(self.levels)


DensitySpec = Annotated[
    Union[SemicircleDensitySpec, UniformDensitySpec, TableDensitySpec, StaircaseDensitySpec],
    Field(discriminator="kind"),
]


class MeasureModelSpec(BaseModel):
    type: Literal["measure"] = "measure"
    atoms: list[tuple[float, Weight]] = Field(default_factory=list)
    density: Optional[DensitySpec] = None
    cap: Optional[int] = None

    @model_validator(mode="after")
    def has_mass(self):
        if not self.atoms and self.density is None:
            raise ValueError("a measure needs atoms, a density, or both")
        return self

    def build(self) -> MeasureModel:
        density = None
        if self.density is not None:
            # an unspecified mass takes whatever the atoms leave over
            mass = getattr(self.density, "mass", None)
            if mass is None:
                mass = 1.0 - sum(m for _, m in self.atoms)
            density = self.density.build(mass)
        return MeasureModel(self.atoms, density, cap=self.cap)


class FreeProductModelSpec(BaseModel):
    type: Literal["free_product"] = "free_product"
    factors: list["ModelSpec"] = Field(min_length=1)
    cap: Optional[int] = None

    def build(self) -> FreeProductModel:
        return FreeProductModel([f.build() for f in self.factors], cap=self.cap)


ModelSpec = Annotated[
    Union[MatrixModelSpec, SemicircularModelSpec, MeasureModelSpec, FreeProductModelSpec],
    Field(discriminator="type"),
]
FreeProductModelSpec.model_rebuild()

_model_adapter = TypeAdapter(ModelSpec)


def load_model_spec(source: Union[str, Path, dict]):
    if isinstance(source, dict):
        return _model_adapter.validate_python(source)
    if isinstance(source, Path):
        source = source.read_text()
    return _model_adapter.validate_json(source)


def build_model(source) -> TraceModel:
    return load_model_spec(source).build()


# Closed-form inputs

class GraphEdge(BaseModel):
    u: int = Field(ge=1)
    v: int = Field(ge=1)
    multiplicity: int = Field(1, ge=1)


class GraphSpec(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: list[Rational] = Field(min_length=1)
    edges: list[GraphEdge] = Field(default_factory=list)

    @field_validator("weights")
    @classmethod
    def weights_are_probabilities(cls, v):
        if any(w <= 0 for w in v):
            raise ValueError("vertex weights must be positive")
        if sum(v) != 1:
            raise ValueError(f"vertex weights sum to {sum(v)}, not 1")
        return v

    @model_validator(mode="after")
    def edges_in_range(self):
        for e in self.edges:
            if max(e.u, e.v) > len(self.weights):
                raise ValueError(f"edge ({e.u}, {e.v}) names a missing vertex")
        return self

    def multiplicities(self) -> dict[tuple[int, int], int]:
        """Symmetric n_{v,w} on 0-based vertices; repeated edges add up."""
        out: dict[tuple[int, int], int] = {}
        for e in self.edges:
            a, b = e.u - 1, e.v - 1
            out[a, b] = out.get((a, b), 0) + e.multiplicity
            if a != b:
                out[b, a] = out.get((b, a), 0) + e.multiplicity
        return out


class RadulescuPair(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tau_e: Rational
    tau_f: Rational
    equal: bool = False

    @field_validator("tau_e", "tau_f")
    @classmethod
    def in_unit_interval(cls, v):
        if not 0 < v <= 1:
            raise ValueError("projection traces lie in (0, 1]")
        return v

    @model_validator(mode="after")
    def equal_means_same_trace(self):
        if self.equal and self.tau_e != self.tau_f:
            raise ValueError("equal projections need equal traces")
        if not self.equal and self.tau_e + self.tau_f > 1:
            raise ValueError("orthogonal projections have traces summing to at most 1")
        return self


class RadulescuSpec(BaseModel):
    pairs: list[RadulescuPair] = Field(default_factory=list)


# Reports

class DegreeScheme(BaseModel):
    d_xi: int = Field(1, ge=0)
    d_proj: Optional[int] = None

    @model_validator(mode="after")
    def default_projection_degree(self):
        if self.d_proj is None:
            self.d_proj = self.d_xi + 2
        if self.d_proj < 1:
            raise ValueError("d_proj must be at least 1 so the identity kernel is in range")
        return self


class ConditionDiagnostics(BaseModel):
    gram_condition: float = 1.0
    rank: int = 0
    truncated_eigenvalues: int = 0


class DiscrepancyReport(ConditionDiagnostics):
    value: float = Field(ge=0)
    scheme: DegreeScheme
    kernel_distance: Optional[float] = None
    radius: Optional[float] = None
    optimizer: list[tuple[float, float]] = Field(default_factory=list)
    xi: Optional[list[dict[str, Any]]] = None

    @model_validator(mode="after")
    def below_kernel_distance(self):
        if self.kernel_distance is not None and self.value > self.kernel_distance + 1e-8:
            raise ValueError(f"projection {self.value} exceeds the kernel distance {self.kernel_distance}")
        return self


class SigmaMode(str, Enum):
    ESTIMATE = "estimate"
    EXACT_FD = "exact_fd"
    EXACT_FD_FREE = "exact_fd_free"


class SigmaReport(ConditionDiagnostics):
    n: int
    sigma: float
    irregularity: float = Field(ge=0)
    mode: SigmaMode
    trail: list[tuple[int, float]] = Field(default_factory=list)
    scheme: Optional[DegreeScheme] = None
    xi: Optional[list[dict[str, Any]]] = None
    factors: list["SigmaReport"] = Field(default_factory=list)

    @model_validator(mode="after")
    def sigma_matches_irregularity(self):
        if abs(self.sigma - (self.n - self.irregularity ** 2)) > 1e-12:
            raise ValueError("sigma must equal n - irregularity^2")
        if self.mode is not SigmaMode.ESTIMATE and not -1e-8 <= self.sigma <= self.n + 1e-8:
            raise ValueError(f"exact sigma {self.sigma} outside [0, {self.n}]")
        return self


class ConjugateVariableReport(BaseModel):
    residual: float
    fisher_info: float
    worst: Optional[str] = None
    tested: int = 0


class ContinuityReport(BaseModel):
    discrepancy_gap: float
    projection_gap: float
    kernel_gap: float
    holds: bool


class MaiGapReport(BaseModel):
    kernel_distance_sq: float
    discrepancy_sq: float
    gap: float


class SweepPoint(BaseModel):
    parameter: float
    value: float
    diagnostics: str = ""


class RadiusSweepReport(BaseModel):
    points: list[SweepPoint]
    violations: list[float] = Field(default_factory=list)
    convex: bool = True


class AlphaReport(BaseModel):
    alpha: float
    diverges: bool = False
    window: list[tuple[float, float]] = Field(default_factory=list)
    floored: list[float] = Field(default_factory=list)

    @field_validator("alpha")
    @classmethod
    def nonpositive(cls, v):
        if not (v <= 0 or math.isnan(v)):
            raise ValueError("alpha is never positive")
        return v


# CLI configuration

class Command(str, Enum):
    DISCREPANCY = "discrepancy"
    IRREGULARITY = "irregularity"
    BOUNDED = "bounded"
    SIGMA_EXACT = "sigma-exact"
    CLOSED_FORM = "closed-form"
    SWEEP_DEGREE = "sweep-degree"
    SWEEP_RADIUS = "sweep-radius"
    ALPHA = "alpha"


class RunConfig(BaseModel):
    command: Command
    model: Optional[Path] = None
    xi: Optional[str] = None
    d_xi: int = Field(1, ge=0)
    d_proj: Optional[int] = None
    degree: int = Field(2, ge=1)
    degrees: list[int] = Field(default_factory=list)
    radii: list[float] = Field(default_factory=list)
    cutoff: float = Field(config.EIGEN_CUTOFF, gt=0)
    out: Optional[Path] = None
    csv: Optional[Path] = None
    seed: int = 0
    threads: int = Field(default_factory=config.default_threads, ge=1)
    cap: int = Field(default_factory=config.degree_cap, ge=1)
    max_condition: float = Field(default_factory=config.max_condition, gt=0)

    @field_validator("radii")
    @classmethod
    def radii_increasing(cls, v):
        if any(r < 0 for r in v):
            raise ValueError("radii must be nonnegative")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("radii must be strictly increasing")
        return v

    @model_validator(mode="after")
    def degrees_within_cap(self):
        scheme = DegreeScheme(d_xi=self.d_xi, d_proj=self.d_proj)
        top = max([scheme.d_xi + 1, scheme.d_proj, self.degree + 1, *self.degrees])
        if top > self.cap:
            raise ValueError(f"degree {top} exceeds the cap of {self.cap} letters")
        return self

    def scheme(self) -> DegreeScheme:
        return DegreeScheme(d_xi=self.d_xi, d_proj=self.d_proj)
