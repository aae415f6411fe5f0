"""
Staged deterministic updating for general likelihood tables.

The table is factored into two-valued stages; each stage runs a deterministic
update on the circuit produced by the previous one, so U_{k+1} prepares the
stage-k posterior from |0>. The angle of every stage is re-derived from the
current intermediate distribution, either classically or by phase estimation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Literal, Optional, Sequence, Union

import numpy as np

from det_update.grover import Conjugation, exact_theta
from det_update.phase_estimation import PhaseEstimator
from det_update.planning import IterationPlan, PlanMode, iteration_plan
from det_update.update import apply_deterministic_update
from models.bayes import bayes_posterior
from models.decomposition import DecompositionStage, decompose_general_model
from models.distributions import HypothesisSpace, PriorDistribution
from models.likelihood import TableLikelihood
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.measurement import fidelity
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException
from shared.utils.logger import get_logger

logger = get_logger("det_update", settings.LOG_LEVEL)

StageRng = Callable[[int], np.random.Generator]


@dataclass(frozen=True)
class ThetaSource:
    kind: Literal["exact_classical", "phase_estimation"] = "exact_classical"
    m: int = 3
    epsilon: float = 0.125

    def __post_init__(self):
        if self.kind not in ("exact_classical", "phase_estimation"):
            raise ConfigException(f"Unknown theta source '{self.kind}'")


@dataclass(frozen=True)
class StageTrace:
    stage: int
    bit_weight: Optional[int]
    favored: tuple[int, ...]
    suppression: float
    theta: float
    theta_exact: float
    theta_prime: float
    T: float
    iterations: int
    fidelity: float
    predicted_fidelity: float
    angle_outcome: Optional[int] = None


@dataclass(frozen=True, eq=False)
class GeneralUpdateResult:
    state: StateVector
    trace: tuple[StageTrace, ...]
    final_fidelity: float
    circuit: Circuit
    posterior: PriorDistribution

    def __iter__(self) -> Iterator:
        return iter((self.state, self.trace, self.final_fidelity))


def _classical_prior(U: Circuit) -> PriorDistribution:
    weights = apply_circuit(StateVector.zero(U.register_width), U).probabilities()
    weights = np.where(weights > settings.PROBABILITY_TOLERANCE ** 2, weights, 0.0)
    return PriorDistribution.from_weights(weights, HypothesisSpace(U.register_width))


def _advance(distribution: np.ndarray, stage: DecompositionStage) -> np.ndarray:
    factors = np.array([stage.factor(h) for h in range(distribution.size)])
    updated = distribution * factors
    return updated / updated.sum()


class StagePipeline:
    """Sequential runner threading the preparation circuit through the stages"""

    def __init__(
        self,
        U: Circuit,
        stages: Sequence[DecompositionStage],
        theta_source: ThetaSource = ThetaSource(),
        mode: PlanMode = "fractional_final",
        conjugation: Conjugation = "prior",
        prior: Optional[PriorDistribution] = None,
    ):
        self.initial_circuit = U
        self.current_circuit = U
        self.stages = tuple(stages)
        self.theta_source = theta_source
        self.mode = mode
        self.conjugation = conjugation
        self.prior = prior or _classical_prior(U)
        self.plans: list[tuple[DecompositionStage, IterationPlan]] = []
        self.trace: list[StageTrace] = []

    def _theta_for(self, index: int, stage: DecompositionStage, distribution: np.ndarray,
                   stage_rng: Optional[StageRng]) -> tuple[float, float, Optional[int]]:
        current = PriorDistribution(self.prior.space, distribution)
        exact = exact_theta(current, stage.favored)
        if self.theta_source.kind == "exact_classical":
            return exact, exact, None
        if stage_rng is None:
            raise ConfigException("Phase-estimated angles need a random stream")
        estimator = PhaseEstimator(
            self.current_circuit, stage.favored, self.theta_source.m, self.theta_source.epsilon, self.conjugation
        )
        estimate = estimator.sample(stage_rng(index))
        return estimate.theta, exact, estimate.outcome

    def run(self, stage_rng: Optional[StageRng] = None) -> list[StageTrace]:
        distribution = self.prior.p.copy()
        for index, stage in enumerate(self.stages):
            theta, exact, outcome = self._theta_for(index, stage, distribution, stage_rng)
            plan = iteration_plan(theta, stage.suppression, self.mode)
            result = apply_deterministic_update(self.current_circuit, stage.favored, plan, conjugation=self.conjugation)

            self.plans.append((stage, plan))
            self.current_circuit = result.new_U
            distribution = _advance(distribution, stage)
            entry = StageTrace(
                index, stage.bit_weight, tuple(sorted(stage.favored)), stage.suppression,
                theta, exact, plan.theta_prime, plan.T, result.iterations,
                result.achieved_fidelity, result.predicted_fidelity, outcome,
            )
            self.trace.append(entry)
            logger.log_stage_event(
                index, None, "completed",
                bit_weight=stage.bit_weight, theta=theta, T=plan.T, fidelity=result.achieved_fidelity,
            )
        return self.trace


def general_update(
    U: Circuit,
    likelihood: Union[TableLikelihood, Sequence[float]],
    K: int,
    theta_source: ThetaSource = ThetaSource(),
    rng: Union[np.random.Generator, StageRng, None] = None,
    mode: PlanMode = "fractional_final",
    conjugation: Conjugation = "prior",
) -> GeneralUpdateResult:
    if not isinstance(likelihood, TableLikelihood):
        likelihood = TableLikelihood(np.asarray(likelihood, dtype=float))
    prior = _classical_prior(U)
    if likelihood.table.size != prior.space.size:
        raise ConfigException(
            f"Likelihood table has {likelihood.table.size} entries, expected {prior.space.size}"
        )
    oracle = bayes_posterior(prior, likelihood).posterior

    stages = decompose_general_model(likelihood, prior.support, K, allow_elimination=True)
    stage_rng = rng if callable(rng) else ((lambda _stage: rng) if rng is not None else None)
    pipeline = StagePipeline(U, stages, theta_source, mode, conjugation, prior)
    trace = pipeline.run(stage_rng)

    state = apply_circuit(StateVector.zero(U.register_width), pipeline.current_circuit)
    final = fidelity(state, StateVector.from_amplitudes(oracle.amplitudes()))
    logger.debug(f"General update finished: {len(stages)} stages, K={K}, fidelity={final:.12f}")
    return GeneralUpdateResult(state, tuple(trace), final, pipeline.current_circuit, oracle)
