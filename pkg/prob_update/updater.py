"""
Probabilistic updating of one copy of the prior state.

An ancilla is rotated conditioned on h and measured; outcome 0 leaves the
register in the posterior state. The iterative variant re-rotates the failure
branch with constants c_k^2 = 1/M_k - 1/M_{k-1} as tighter bounds M_k arrive.
All probabilities are read exactly from the simulated state; sampling only
decides which branch a trial follows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from models.bayes import evidence, max_likelihood_over_support
from models.distributions import PriorDistribution
from models.likelihood import LikelihoodModel
from prob_update.rotation import build_update_rotation
from quantum_core.circuit import apply_circuit
from quantum_core.measurement import branch_probabilities, measure
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, ContractViolationException, ZeroEvidenceException
from shared.utils.logger import get_logger

logger = get_logger("prob_update", settings.LOG_LEVEL)

SUCCESS_OUTCOME = 0
EXHAUSTED_RESIDUAL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class ShotConfig:
    """How c^2 is chosen for a single shot: 1, 1/M for a known bound M, or 1/max P(d|h)"""

    c_squared_mode: Literal["trivial", "bound", "exact_max"] = "exact_max"
    bound: Optional[float] = None

    def __post_init__(self):
        if self.c_squared_mode == "bound":
            if self.bound is None or not (0.0 < self.bound <= 1.0):
                raise ConfigException(f"Bound mode needs M in (0, 1], got {self.bound}")

    def resolve(self, prior: PriorDistribution, likelihood: LikelihoodModel) -> float:
        if self.c_squared_mode == "trivial":
            return 1.0
        if self.c_squared_mode == "bound":
            return 1.0 / self.bound
        maximum = max_likelihood_over_support(prior, likelihood)
        if maximum <= 0.0:
            raise ZeroEvidenceException("Likelihood vanishes on the whole support")
        return 1.0 / maximum


@dataclass(frozen=True)
class BoundSchedule:
    """Strictly decreasing upper bounds M_1 > M_2 > ... on max P(d|h)"""

    bounds: tuple[float, ...]

    def __post_init__(self):
        bounds = tuple(float(m) for m in self.bounds)
        if not bounds:
            raise ConfigException("Bound schedule must contain at least one bound")
        if any(not (0.0 < m <= 1.0) for m in bounds):
            raise ConfigException("Every bound must lie in (0, 1]")
        if any(later >= earlier for earlier, later in zip(bounds, bounds[1:])):
            raise ConfigException("bounds must strictly decrease")
        object.__setattr__(self, "bounds", bounds)

    def c_squared(self) -> tuple[float, ...]:
        """c_k^2 = 1/M_k - 1/M_{k-1}, with 1/M_0 = 0"""
        previous = 0.0
        constants = []
        for m in self.bounds:
            constants.append(1.0 / m - previous)
            previous = 1.0 / m
        return tuple(constants)


@dataclass(frozen=True, eq=False)
class IterationState:
    """Failure branch after stage k: register amplitudes N_k sqrt(P(h)) B_k(h)"""

    stage: int
    residual_profile: np.ndarray
    cumulative_c_squared: float
    normalization: float


@dataclass(frozen=True, eq=False)
class StageRecord:
    stage: int
    c_squared: float
    p_exact: float
    p_closed_form: float
    p_ratio_form: float
    rotated_state: StateVector
    failure: Optional[IterationState]


@dataclass(frozen=True, eq=False)
class UpdateOutcome:
    success: bool
    state: StateVector
    exact_stage_probabilities: tuple[float, ...]
    cumulative_success: float
    stage_reached: int
    outcomes: tuple[int, ...] = field(default_factory=tuple)
    c_squared: tuple[float, ...] = field(default_factory=tuple)


def prior_from_state(state: StateVector) -> PriorDistribution:
    """Classical table |amplitude|^2 of a register state"""
    weights = state.probabilities()
    weights = np.where(weights > settings.PROBABILITY_TOLERANCE ** 2, weights, 0.0)
    return PriorDistribution.from_weights(weights)


def success_probability_bound(prior: PriorDistribution, likelihood: LikelihoodModel) -> float:
    """P(d) / max over the support of P(d|h)"""
    p_d = evidence(prior, likelihood)
    if p_d <= 0.0:
        raise ZeroEvidenceException("Evidence P(d) is zero; no success probability bound exists")
    return min(1.0, p_d / max_likelihood_over_support(prior, likelihood))


def kraus_success_probability(prior: PriorDistribution, likelihood: LikelihoodModel, c_squared: float) -> float:
    """Classical prediction c^2 P(d) for the success branch of one shot"""
    return c_squared * evidence(prior, likelihood)


def residual_profile(likelihood_values: np.ndarray, cumulative_c_squared: float) -> np.ndarray:
    """B_k(h) = sqrt(1 - P(d|h) sum_s c_s^2), floored at 0 off the support"""
    remaining = 1.0 - likelihood_values * cumulative_c_squared
    # a remainder at rounding level means the hypothesis is exhausted
    remaining = np.where(remaining > EXHAUSTED_RESIDUAL, remaining, 0.0)
    return np.sqrt(remaining)


def failure_state(prior: PriorDistribution, likelihood: LikelihoodModel, cumulative_c_squared: float) -> np.ndarray:
    """Closed-form register amplitudes of the failure branch, N_k sqrt(P(h)) B_k(h)"""
    values = likelihood.values(prior.space)
    unnormalized = np.sqrt(prior.p) * residual_profile(values, cumulative_c_squared)
    norm_squared = 1.0 - cumulative_c_squared * evidence(prior, likelihood)
    if norm_squared <= 0.0:
        return np.zeros_like(unnormalized)
    return unnormalized / np.sqrt(norm_squared)


def _average_residual(prior: PriorDistribution, values: np.ndarray, cumulative: float) -> float:
    """<B_k^2> = sum_h P(h) B_k(h)^2, computed classically"""
    return float(np.dot(prior.p, residual_profile(values, cumulative) ** 2))


class ProbabilisticUpdater:
    """
    Precomputes every stage of a (possibly single-stage) probabilistic update.

    The pre-measurement state of stage k, conditioned on failure at all earlier
    stages, is deterministic; ``run`` only samples ancilla outcomes from those
    states, so many trials share one exact simulation.
    """

    def __init__(
        self,
        prior_state: StateVector,
        likelihood: LikelihoodModel,
        c_squared: Sequence[float],
        prior: Optional[PriorDistribution] = None,
    ):
        self.prior_state = prior_state
        self.likelihood = likelihood
        self.prior = prior or prior_from_state(prior_state)
        self.n = prior_state.qubit_count
        self.values = likelihood.values(self.prior.space)
        self.evidence = evidence(self.prior, likelihood)
        if self.evidence <= 0.0:
            raise ZeroEvidenceException("Evidence P(d) is zero; Bayesian updating is undefined")
        self.c_squared = tuple(float(c) for c in c_squared)
        self.stages: list[StageRecord] = []
        self._build()

    def _check(self, label: str, actual: float, expected: float, stage: int) -> None:
        if abs(actual - expected) > settings.PROBABILITY_TOLERANCE * 10:
            logger.error(f"Stage {stage}: {label} {actual!r} disagrees with {expected!r}")
            raise ContractViolationException(
                f"Stage {stage}: {label} {actual:.15g} differs from the predicted {expected:.15g}"
            )

    def _build(self) -> None:
        state = self.prior_state.tensor_ancillas(1)
        previous_profile: Optional[np.ndarray] = None
        cumulative = 0.0
        previous_c = 0.0

        for k, c2 in enumerate(self.c_squared, start=1):
            circuit = build_update_rotation(
                self.likelihood, c2, previous_profile, space=self.prior.space, support=self.prior.support
            )
            rotated = apply_circuit(state, circuit)
            p_success, p_failure = branch_probabilities(rotated, self.n)

            closed_form = self.evidence * c2 / (1.0 - self.evidence * cumulative)
            ratio_denominator = _average_residual(self.prior, self.values, cumulative - previous_c) - previous_c * self.evidence
            ratio_form = c2 * self.evidence / ratio_denominator
            self._check("branch probability", p_success, closed_form, k)
            self._check("ratio-form probability", ratio_form, closed_form, k)
            if k == 1:
                self._check("Kraus prediction", p_success, kraus_success_probability(self.prior, self.likelihood, c2), k)

            cumulative += c2
            previous_c = c2
            failure = None
            if p_failure > settings.PROBABILITY_TOLERANCE:
                collapsed = np.zeros_like(rotated.amplitudes)
                block = 2 ** self.n
                collapsed[block:] = rotated.amplitudes[block:] / np.sqrt(p_failure)
                profile = residual_profile(self.values, cumulative)
                failure = IterationState(k, profile, cumulative, 1.0 / np.sqrt(p_failure))
                expected = failure_state(self.prior, self.likelihood, cumulative)
                # compared as probabilities near exhausted residuals
                drift = float(np.max(np.abs(np.abs(collapsed[block:]) ** 2 - np.abs(expected) ** 2)))
                if drift > settings.PROBABILITY_TOLERANCE * 10:
                    raise ContractViolationException(f"Stage {k}: failure branch deviates from closed form by {drift:.3e}")
                state = StateVector(self.n + 1, collapsed)
                previous_profile = profile

            self.stages.append(StageRecord(k, c2, p_success, closed_form, ratio_form, rotated, failure))
            logger.log_stage_event(k, None, "built", c_squared=c2, p_exact=p_success, cumulative_c_squared=cumulative)
            if failure is None:
                break

    @property
    def exact_stage_probabilities(self) -> tuple[float, ...]:
        return tuple(s.p_exact for s in self.stages)

    @property
    def cumulative_success(self) -> float:
        return self.evidence * sum(s.c_squared for s in self.stages)

    def run(self, stage_rng: Callable[[int], np.random.Generator]) -> UpdateOutcome:
        """Sample one trial; ``stage_rng(k)`` supplies the generator for stage k"""
        outcomes = []
        last = None
        for record in self.stages:
            result = measure(record.rotated_state, [self.n], stage_rng(record.stage))
            outcomes.append(result.outcome)
            last = result
            if result.outcome == SUCCESS_OUTCOME:
                register = StateVector(self.n, result.collapsed.register_block(self.n, SUCCESS_OUTCOME))
                return UpdateOutcome(
                    True, register, self.exact_stage_probabilities, self.cumulative_success,
                    record.stage, tuple(outcomes), self.c_squared,
                )
        register = StateVector(self.n, last.collapsed.register_block(self.n, 1 - SUCCESS_OUTCOME))
        return UpdateOutcome(
            False, register, self.exact_stage_probabilities, self.cumulative_success,
            len(self.stages), tuple(outcomes), self.c_squared,
        )


def single_shot_update(
    prior_state: StateVector,
    likelihood: LikelihoodModel,
    config: ShotConfig,
    rng: np.random.Generator,
    prior: Optional[PriorDistribution] = None,
) -> UpdateOutcome:
    prior = prior or prior_from_state(prior_state)
    c_squared = config.resolve(prior, likelihood)
    updater = ProbabilisticUpdater(prior_state, likelihood, [c_squared], prior)
    return updater.run(lambda _stage: rng)


def iterative_update(
    prior_state: StateVector,
    likelihood: LikelihoodModel,
    schedule: BoundSchedule,
    rng: np.random.Generator,
    prior: Optional[PriorDistribution] = None,
) -> UpdateOutcome:
    updater = ProbabilisticUpdater(prior_state, likelihood, schedule.c_squared(), prior)
    return updater.run(lambda _stage: rng)
