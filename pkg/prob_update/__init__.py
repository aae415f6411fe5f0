# Probabilistic Bayesian updating (ancilla rotation + measurement)
from prob_update.rotation import build_update_rotation, rotation_amplitudes
from prob_update.updater import (
    SUCCESS_OUTCOME,
    BoundSchedule,
    IterationState,
    ProbabilisticUpdater,
    ShotConfig,
    StageRecord,
    UpdateOutcome,
    failure_state,
    iterative_update,
    kraus_success_probability,
    prior_from_state,
    residual_profile,
    single_shot_update,
    success_probability_bound,
)

__all__ = [
    "SUCCESS_OUTCOME",
    "BoundSchedule",
    "IterationState",
    "ProbabilisticUpdater",
    "ShotConfig",
    "StageRecord",
    "UpdateOutcome",
    "build_update_rotation",
    "failure_state",
    "iterative_update",
    "kraus_success_probability",
    "prior_from_state",
    "residual_profile",
    "rotation_amplitudes",
    "single_shot_update",
    "success_probability_bound",
]
