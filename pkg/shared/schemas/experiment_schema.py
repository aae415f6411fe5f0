from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

from shared.config.settings import settings


class UniformPrior(BaseModel):
    kind: Literal["uniform"] = "uniform"


class TablePrior(BaseModel):
    kind: Literal["table"] = "table"
    values: List[float] = Field(..., min_length=2, description="P(h) for h = 0..2^n-1")

    @field_validator("values")
    @classmethod
    def check_normalized(cls, values: List[float]) -> List[float]:
        if any(v < 0 for v in values):
            raise ValueError("prior entries must be non-negative")
        total = sum(values)
        if abs(total - 1.0) > settings.PROBABILITY_TOLERANCE:
            raise ValueError(f"prior not normalized (sum = {total:.15g})")
        return values


class PointPrior(BaseModel):
    kind: Literal["point"] = "point"
    h: int = Field(..., ge=0, description="Hypothesis carrying all prior mass")


class GeometricPrior(BaseModel):
    kind: Literal["geometric"] = "geometric"
    ratio: float = Field(..., gt=0, description="p(h) proportional to ratio^h")


class RandomPrior(BaseModel):
    kind: Literal["random"] = "random"
    seed: int = Field(..., ge=0, description="Seed of the flat Dirichlet draw")


PriorSpec = Annotated[
    Union[UniformPrior, TablePrior, PointPrior, GeometricPrior, RandomPrior],
    Field(discriminator="kind"),
]


class TableLikelihoodSpec(BaseModel):
    kind: Literal["table"] = "table"
    values: List[float] = Field(..., min_length=2, description="P(d|h) for h = 0..2^n-1")

    @field_validator("values")
    @classmethod
    def check_range(cls, values: List[float]) -> List[float]:
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError("likelihood values must lie in [0, 1]")
        return values


class TwoValuedLikelihoodSpec(BaseModel):
    kind: Literal["two_valued"] = "two_valued"
    favored: List[int] = Field(..., min_length=1, description="Favored hypotheses H_d")
    r: float = Field(..., gt=1.0, description="Suppression coefficient a1/a2")


class EliminationLikelihoodSpec(BaseModel):
    kind: Literal["elimination"] = "elimination"
    favored: List[int] = Field(..., min_length=1, description="Hypotheses consistent with the data")


LikelihoodSpec = Annotated[
    Union[TableLikelihoodSpec, TwoValuedLikelihoodSpec, EliminationLikelihoodSpec],
    Field(discriminator="kind"),
]


class ProbAlgorithm(BaseModel):
    """Probabilistic update: a single shot, or an iterative schedule of bounds"""

    kind: Literal["prob"] = "prob"
    mode: Literal["trivial", "bound", "exact_max"] = "exact_max"
    bound: Optional[float] = Field(default=None, gt=0, le=1)
    schedule: Optional[List[float]] = Field(default=None, min_length=1)

    @field_validator("schedule")
    @classmethod
    def check_schedule(cls, schedule: Optional[List[float]]) -> Optional[List[float]]:
        if schedule is None:
            return schedule
        if any(not (0.0 < m <= 1.0) for m in schedule):
            raise ValueError("bounds must lie in (0, 1]")
        if any(later >= earlier for earlier, later in zip(schedule, schedule[1:])):
            raise ValueError("bounds must strictly decrease")
        return schedule

    @model_validator(mode="after")
    def check_bound(self) -> "ProbAlgorithm":
        if self.mode == "bound" and self.bound is None and self.schedule is None:
            raise ValueError("mode 'bound' needs a bound M")
        return self


class DetAlgorithm(BaseModel):
    """Deterministic update by Grover iterations on the prior circuit"""

    kind: Literal["det"] = "det"
    model: Literal["auto", "two_valued", "general"] = "auto"
    m: int = Field(default=3, ge=1, description="Accuracy bits of phase estimation")
    epsilon: float = Field(default=0.125, gt=0, lt=0.5, description="Failure budget of phase estimation")
    mode: Literal["closest_integer", "fractional_final", "fractional_power"] = "fractional_final"
    K: int = Field(default=settings.DEFAULT_FRACTIONAL_BITS, ge=1, description="Fractional bits of the decomposition")
    theta_source: Literal["exact_classical", "phase_estimation"] = "exact_classical"
    conjugation: Literal["prior", "printed"] = "prior"


AlgorithmSpec = Annotated[Union[ProbAlgorithm, DetAlgorithm], Field(discriminator="kind")]


class ExperimentConfig(BaseModel):
    """One experiment document"""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_id: str = Field(default=settings.CONFIG_SCHEMA, alias="schema")
    n: int = Field(..., ge=1, le=settings.MAX_QUBITS, description="Register qubits; hypotheses 0..2^n-1")
    prior: PriorSpec = Field(default_factory=UniformPrior)
    likelihood: LikelihoodSpec
    algorithm: AlgorithmSpec
    trials: int = Field(default=0, ge=0)
    master_seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("schema_id")
    @classmethod
    def check_schema(cls, value: str) -> str:
        if value != settings.CONFIG_SCHEMA:
            raise ValueError(f"unsupported schema '{value}', expected '{settings.CONFIG_SCHEMA}'")
        return value

    @model_validator(mode="after")
    def check_sizes(self) -> "ExperimentConfig":
        size = 2 ** self.n
        if isinstance(self.prior, TablePrior) and len(self.prior.values) != size:
            raise ValueError(f"prior table has {len(self.prior.values)} entries, expected {size}")
        if isinstance(self.prior, PointPrior) and self.prior.h >= size:
            raise ValueError(f"point prior h={self.prior.h} outside 0..{size - 1}")
        if isinstance(self.likelihood, TableLikelihoodSpec) and len(self.likelihood.values) != size:
            raise ValueError(f"likelihood table has {len(self.likelihood.values)} entries, expected {size}")
        favored = getattr(self.likelihood, "favored", None)
        if favored is not None and any(h < 0 or h >= size for h in favored):
            raise ValueError(f"favored set reaches outside 0..{size - 1}")
        return self
