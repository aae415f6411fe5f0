# Deterministic Bayesian updating (Grover iterations on the prior circuit)
from det_update.grover import GroverOperator, build_grover_operator, exact_theta, split_prior
from det_update.phase_estimation import (
    AngleEstimate,
    PhaseEstimator,
    ancilla_count,
    angle_error_bound,
    estimate_theta,
    fold_outcome,
)
from det_update.planning import (
    PLAN_MODES,
    FractionalPhases,
    IterationPlan,
    fidelity_bound,
    iteration_plan,
    plane_operator,
    posterior_angle,
    predicted_fidelity,
    solve_fractional_phases,
)
from det_update.update import DeterministicResult, apply_deterministic_update, fractional_power, two_valued_target
from det_update.pipeline import GeneralUpdateResult, StagePipeline, StageTrace, ThetaSource, general_update

__all__ = [
    "GroverOperator",
    "build_grover_operator",
    "exact_theta",
    "split_prior",
    "AngleEstimate",
    "PhaseEstimator",
    "ancilla_count",
    "angle_error_bound",
    "estimate_theta",
    "fold_outcome",
    "PLAN_MODES",
    "FractionalPhases",
    "IterationPlan",
    "fidelity_bound",
    "iteration_plan",
    "plane_operator",
    "posterior_angle",
    "predicted_fidelity",
    "solve_fractional_phases",
    "DeterministicResult",
    "apply_deterministic_update",
    "fractional_power",
    "two_valued_target",
    "GeneralUpdateResult",
    "StagePipeline",
    "StageTrace",
    "ThetaSource",
    "general_update",
]
