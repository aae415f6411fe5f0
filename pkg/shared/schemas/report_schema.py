from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from shared.config.settings import settings


class StageSummary(BaseModel):
    """Exact quantities of one algorithm stage"""

    stage: int
    p_exact: Optional[float] = None
    c_squared: Optional[float] = None
    bit_weight: Optional[int] = None
    favored: Optional[List[int]] = None
    suppression: Optional[float] = None
    theta: Optional[float] = None
    theta_prime: Optional[float] = None
    T: Optional[float] = None
    iterations: Optional[int] = None
    fidelity: Optional[float] = None
    predicted_fidelity: Optional[float] = None


class ExactSection(BaseModel):
    evidence: float
    bound: Optional[float] = None
    max_likelihood: Optional[float] = None
    prior: List[float]
    posterior: List[float]
    p_stages: List[float] = Field(default_factory=list)
    c_squared: List[float] = Field(default_factory=list)
    cumulative_success: Optional[float] = None
    theta: Optional[float] = None
    theta_prime: Optional[float] = None
    T: Optional[float] = None
    predicted_fidelity: Optional[float] = None
    fidelity_bound: Optional[float] = None
    circuit: Optional[Dict[str, Any]] = None
    fidelity: Optional[float] = None
    theta_distribution: Optional[Dict[str, float]] = None
    angle_failure_probability: Optional[float] = None
    ancillas: Optional[int] = None
    stages: List[StageSummary] = Field(default_factory=list)


class TrialRow(BaseModel):
    """One CSV row: a trial at one stage"""

    trial: int
    stage: int
    p_exact: Optional[float] = None
    outcome: Optional[int] = None
    fidelity: Optional[float] = None


class SampledSection(BaseModel):
    trials: int
    successes: Optional[int] = None
    success_frequency: Optional[float] = None
    standard_error: Optional[float] = None
    theta_histogram: Optional[Dict[str, int]] = None
    angle_failure_frequency: Optional[float] = None
    mean_fidelity: Optional[float] = None
    min_fidelity: Optional[float] = None
    bound_violations: Optional[int] = None
    ancilla_counts: Optional[List[int]] = None
    rows: List[TrialRow] = Field(default_factory=list)


class OracleCheck(BaseModel):
    """Comparison of the quantum result with the classical Bayes posterior"""

    fidelity: Optional[float] = None
    total_variation: Optional[float] = None
    tolerance: float
    passed: bool
    detail: Optional[str] = None


class TimingSection(BaseModel):
    started_at: str
    elapsed_seconds: float


class RunReport(BaseModel):
    model_config = ConfigDict(
        populate_by_name=True,
        json_schema_extra={
            "example": {
                "schema": "bayes-update/report/v1",
                "verb": "update prob",
                "master_seed": 7,
                "config": {},
                "exact": {"evidence": 0.25, "bound": 0.5, "prior": [0.25] * 4, "posterior": [0.5, 0.25, 0.125, 0.125]},
                "sampled": None,
                "oracle": {"fidelity": 1.0, "total_variation": 0.0, "tolerance": 1e-12, "passed": True},
                "timing": {"started_at": "2024-01-01T00:00:00", "elapsed_seconds": 0.01},
            }
        },
    )

    schema_id: str = Field(default=settings.REPORT_SCHEMA, alias="schema")
    verb: str
    master_seed: int
    config: Dict[str, Any]
    exact: ExactSection
    sampled: Optional[SampledSection] = None
    oracle: Optional[OracleCheck] = None
    timing: Optional[TimingSection] = None

    def deterministic_json(self) -> str:
        """Byte-stable JSON of everything but timing"""
        return self.model_dump_json(by_alias=True, exclude={"timing"}, indent=2)
