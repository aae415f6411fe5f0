"""
Seeded experiment runner.

Every verb computes the exact quantities once, runs the configured number of
trials on per-trial substreams (master_seed, trial, stage) and compares the
quantum result with the classical Bayes posterior.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Optional, TypeVar

import numpy as np

from det_update.grover import exact_theta
from det_update.phase_estimation import PhaseEstimator
from det_update.pipeline import ThetaSource, general_update
from det_update.planning import fidelity_bound, iteration_plan
from det_update.update import apply_deterministic_update
from harness.config_loader import resolve_likelihood, resolve_prior, resolve_space
from models.bayes import PosteriorResult, bayes_posterior, max_likelihood_over_support
from models.decomposition import decompose_general_model, reconstruct_likelihood
from models.distributions import HypothesisSpace, PriorDistribution, total_variation
from models.likelihood import LikelihoodModel, TableLikelihood
from prob_update.updater import (
    SUCCESS_OUTCOME,
    BoundSchedule,
    ProbabilisticUpdater,
    ShotConfig,
    success_probability_bound,
)
from quantum_core.circuit import Circuit, apply_circuit, serialize_circuit
from quantum_core.measurement import fidelity, sample_counts
from quantum_core.preparation import amplitude_state, prepare_prior_circuit
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.schemas.experiment_schema import DetAlgorithm, ExperimentConfig, ProbAlgorithm
from shared.schemas.report_schema import (
    ExactSection,
    OracleCheck,
    RunReport,
    SampledSection,
    StageSummary,
    TimingSection,
    TrialRow,
)
from shared.utils.exceptions import ConfigException, ContractViolationException
from shared.utils.logger import get_logger
from shared.utils.rng import make_streams, substream

logger = get_logger("harness", settings.LOG_LEVEL)

R = TypeVar("R")

PROB_ORACLE_TOLERANCE = 1e-10
DET_ORACLE_TOLERANCE = 1e-9
BOUND_SLACK = 1e-12
# single-key substream, disjoint from the (trial, stage) keys
COPY_STREAM = 2 ** 32 - 1
BOUNDED_MODES = ("fractional_final", "fractional_power")

VERBS = ("update prob", "update det", "estimate-theta", "bound", "decompose", "verify")


@dataclass(frozen=True, eq=False)
class RunContext:
    config: ExperimentConfig
    verb: str
    run_id: str
    space: HypothesisSpace
    prior: PriorDistribution
    likelihood: LikelihoodModel
    oracle: PosteriorResult

    @property
    def target(self) -> StateVector:
        return amplitude_state(self.oracle.posterior.p)


def run_trials(count: int, trial: Callable[[int], R]) -> list[R]:
    """Results of ``trial(i)`` for i in 0..count-1, in trial order"""
    if count <= 0:
        return []
    if settings.TRIAL_WORKERS <= 1:
        return [trial(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=settings.TRIAL_WORKERS) as pool:
        return list(pool.map(trial, range(count)))


def angle_key(theta: float) -> str:
    return f"{theta:.12f}"


def _branch_state(rotated: StateVector, n: int) -> StateVector:
    return StateVector.from_amplitudes(rotated.register_block(n, SUCCESS_OUTCOME), normalize=True)


def _exact_base(ctx: RunContext) -> dict:
    return {
        "evidence": ctx.oracle.evidence,
        "prior": [float(v) for v in ctx.prior.p],
        "posterior": [float(v) for v in ctx.oracle.posterior.p],
    }


def _prior_state(ctx: RunContext) -> tuple[Circuit, StateVector]:
    U = prepare_prior_circuit(ctx.prior)
    return U, apply_circuit(StateVector.zero(ctx.space.n), U)


# Probabilistic updating

def _shot_constants(algorithm: ProbAlgorithm, ctx: RunContext) -> tuple[float, ...]:
    if algorithm.schedule:
        return BoundSchedule(tuple(algorithm.schedule)).c_squared()
    return (ShotConfig(algorithm.mode, algorithm.bound).resolve(ctx.prior, ctx.likelihood),)


def _probabilistic(ctx: RunContext, c_squared: tuple[float, ...]):
    _, state = _prior_state(ctx)
    updater = ProbabilisticUpdater(state, ctx.likelihood, c_squared, ctx.prior)
    n = ctx.space.n
    target = ctx.target

    stages, fidelities, gaps = [], [], []
    for record in updater.stages:
        branch_fidelity = None
        if record.p_exact > settings.PROBABILITY_TOLERANCE:
            branch = _branch_state(record.rotated_state, n)
            branch_fidelity = fidelity(branch, target)
            fidelities.append(branch_fidelity)
            gaps.append(total_variation(branch.probabilities(), ctx.oracle.posterior.p))
        stages.append(StageSummary(
            stage=record.stage, p_exact=record.p_exact, c_squared=record.c_squared, fidelity=branch_fidelity,
        ))
    return updater, stages, fidelities, gaps


def run_prob(ctx: RunContext) -> tuple[ExactSection, Optional[SampledSection], OracleCheck]:
    algorithm = ctx.config.algorithm
    if not isinstance(algorithm, ProbAlgorithm):
        raise ConfigException("algorithm: 'update prob' needs a prob algorithm")
    updater, stages, fidelities, gaps = _probabilistic(ctx, _shot_constants(algorithm, ctx))
    exact = ExactSection(
        **_exact_base(ctx),
        bound=success_probability_bound(ctx.prior, ctx.likelihood),
        max_likelihood=max_likelihood_over_support(ctx.prior, ctx.likelihood),
        p_stages=list(updater.exact_stage_probabilities),
        c_squared=list(updater.c_squared[:len(updater.stages)]),
        cumulative_success=updater.cumulative_success,
        stages=stages,
    )

    seed = ctx.config.master_seed
    target = ctx.target

    def trial(index: int):
        outcome = updater.run(make_streams(seed, index).stage)
        return outcome, (fidelity(outcome.state, target) if outcome.success else None)

    results = run_trials(ctx.config.trials, trial)
    sampled = None
    if results:
        rows = []
        for index, (outcome, trial_fidelity) in enumerate(results):
            for k, record in enumerate(updater.stages, start=1):
                reached = k <= len(outcome.outcomes)
                rows.append(TrialRow(
                    trial=index,
                    stage=k,
                    p_exact=record.p_exact,
                    outcome=outcome.outcomes[k - 1] if reached else None,
                    fidelity=trial_fidelity if outcome.success and k == outcome.stage_reached else None,
                ))
        successes = sum(1 for outcome, _ in results if outcome.success)
        p = updater.cumulative_success
        observed = [f for _, f in results if f is not None]
        copies = sample_counts(
            updater.stages[0].rotated_state, [ctx.space.n], len(results), substream(seed, COPY_STREAM)
        )
        sampled = SampledSection(
            trials=len(results),
            successes=successes,
            success_frequency=successes / len(results),
            standard_error=math.sqrt(max(p * (1.0 - p), 0.0) / len(results)),
            mean_fidelity=float(np.mean(observed)) if observed else None,
            min_fidelity=float(np.min(observed)) if observed else None,
            ancilla_counts=[int(c) for c in copies],
            rows=rows,
        )

    worst = min(fidelities) if fidelities else None
    oracle = OracleCheck(
        fidelity=worst,
        total_variation=max(gaps) if gaps else None,
        tolerance=PROB_ORACLE_TOLERANCE,
        passed=worst is not None and 1.0 - worst <= PROB_ORACLE_TOLERANCE,
    )
    return exact, sampled, oracle


def run_bound(ctx: RunContext) -> tuple[ExactSection, None, OracleCheck]:
    maximum = max_likelihood_over_support(ctx.prior, ctx.likelihood)
    bound = success_probability_bound(ctx.prior, ctx.likelihood)
    updater, stages, fidelities, gaps = _probabilistic(ctx, (1.0 / maximum,))
    p_exact = updater.exact_stage_probabilities[0]
    exact = ExactSection(
        **_exact_base(ctx),
        bound=bound,
        max_likelihood=maximum,
        p_stages=[p_exact],
        c_squared=[1.0 / maximum],
        cumulative_success=p_exact,
        stages=stages,
    )
    gap = abs(p_exact - bound)
    oracle = OracleCheck(
        fidelity=fidelities[0] if fidelities else None,
        total_variation=gaps[0] if gaps else None,
        tolerance=PROB_ORACLE_TOLERANCE,
        passed=gap <= PROB_ORACLE_TOLERANCE and bool(fidelities) and 1.0 - fidelities[0] <= PROB_ORACLE_TOLERANCE,
        detail=f"|p_exact - bound| = {gap:.3e}",
    )
    return exact, None, oracle


# Deterministic updating

def _det_algorithm(ctx: RunContext) -> DetAlgorithm:
    algorithm = ctx.config.algorithm
    if isinstance(algorithm, DetAlgorithm):
        return algorithm
    return DetAlgorithm()


def _favored_model(ctx: RunContext) -> tuple[frozenset, float]:
    favored = ctx.likelihood.favored
    if favored is None:
        raise ConfigException("likelihood: this verb needs a two_valued or elimination likelihood")
    return favored, ctx.likelihood.suppression


def _uses_general_pipeline(ctx: RunContext, algorithm: DetAlgorithm) -> bool:
    if algorithm.model == "general":
        return True
    if algorithm.model == "two_valued":
        _favored_model(ctx)
        return False
    return ctx.likelihood.favored is None


def run_det(ctx: RunContext) -> tuple[ExactSection, Optional[SampledSection], OracleCheck]:
    algorithm = _det_algorithm(ctx)
    if _uses_general_pipeline(ctx, algorithm):
        return _run_general(ctx, algorithm)
    return _run_two_valued(ctx, algorithm)


def _run_two_valued(ctx: RunContext, algorithm: DetAlgorithm):
    favored, r = _favored_model(ctx)
    U, _ = _prior_state(ctx)
    theta = exact_theta(ctx.prior, favored)
    plan = iteration_plan(theta, r, algorithm.mode)
    result = apply_deterministic_update(U, favored, plan, conjugation=algorithm.conjugation)

    exact = ExactSection(
        **_exact_base(ctx),
        theta=theta,
        theta_prime=plan.theta_prime,
        T=plan.T,
        predicted_fidelity=result.predicted_fidelity,
        fidelity=result.achieved_fidelity,
        stages=[StageSummary(
            stage=0, favored=sorted(favored), suppression=r, theta=theta, theta_prime=plan.theta_prime,
            T=plan.T, iterations=result.iterations, fidelity=result.achieved_fidelity,
            predicted_fidelity=result.predicted_fidelity,
        )],
    )
    exact.circuit = serialize_circuit(result.new_U)
    logger.log_stage_event(0, ctx.run_id, "planned", theta=theta, T=plan.T, fidelity=result.achieved_fidelity)

    sampled = None
    violations = None
    if algorithm.theta_source == "phase_estimation":
        estimator = PhaseEstimator(U, favored, algorithm.m, algorithm.epsilon, algorithm.conjugation)
        exact.theta_distribution = {angle_key(a): p for a, p in estimator.folded_distribution().items()}
        exact.angle_failure_probability = estimator.failure_probability()
        exact.ancillas = estimator.t
        if _bound_applies(r, algorithm):
            exact.fidelity_bound = modal_fidelity_bound(estimator, theta)
        sampled, violations = _phase_estimated_trials(ctx, algorithm, estimator, U, favored, r, theta)
    elif ctx.config.trials > 0:
        rows = [TrialRow(trial=i, stage=0, fidelity=result.achieved_fidelity) for i in range(ctx.config.trials)]
        sampled = SampledSection(
            trials=ctx.config.trials,
            mean_fidelity=result.achieved_fidelity,
            min_fidelity=result.achieved_fidelity,
            rows=rows,
        )

    gap = total_variation(result.state.probabilities(), ctx.oracle.posterior.p)
    if algorithm.mode == "closest_integer":
        passed = abs(result.achieved_fidelity - result.predicted_fidelity) <= DET_ORACLE_TOLERANCE
        detail = "closest_integer: measured fidelity compared with the predicted fidelity"
    else:
        passed = 1.0 - result.achieved_fidelity <= DET_ORACLE_TOLERANCE
        detail = None
    if violations:
        passed = False
        detail = f"{violations} trials fell below the fidelity bound"
    oracle = OracleCheck(
        fidelity=result.achieved_fidelity, total_variation=gap, tolerance=DET_ORACLE_TOLERANCE,
        passed=passed, detail=detail,
    )
    return exact, sampled, oracle


def _bound_applies(r: float, algorithm: DetAlgorithm) -> bool:
    """The fidelity bound covers elimination updates planned in a fractional mode"""
    return math.isinf(r) and algorithm.mode in BOUNDED_MODES


def modal_fidelity_bound(estimator: PhaseEstimator, theta: float) -> float:
    """Fidelity bound at the most probable angle estimate, using its actual error"""
    modal = estimator.modal_estimate()
    return fidelity_bound(modal, delta=abs(modal.theta - theta))


def _phase_estimated_trials(ctx, algorithm, estimator, U, favored, r, theta):
    seed = ctx.config.master_seed
    estimates = run_trials(ctx.config.trials, lambda index: estimator.sample(make_streams(seed, index).stage(0)))
    if not estimates:
        return None, None

    # the update only depends on the outcome, so each distinct outcome is simulated once
    by_outcome = {}
    for estimate in estimates:
        if estimate.outcome not in by_outcome:
            plan = iteration_plan(estimate.theta, r, algorithm.mode)
            by_outcome[estimate.outcome] = apply_deterministic_update(
                U, favored, plan, conjugation=algorithm.conjugation
            ).achieved_fidelity

    check_bound = _bound_applies(r, algorithm)
    rows, fidelities, histogram = [], [], {}
    failures = violations = 0
    for index, estimate in enumerate(estimates):
        measured = by_outcome[estimate.outcome]
        fidelities.append(measured)
        key = angle_key(estimate.theta)
        histogram[key] = histogram.get(key, 0) + 1
        error = abs(estimate.theta - theta)
        failures += error > estimate.delta
        if check_bound and measured < fidelity_bound(estimate, delta=error) - BOUND_SLACK:
            violations += 1
        rows.append(TrialRow(
            trial=index, stage=0, p_exact=estimate.probability, outcome=estimate.outcome, fidelity=measured,
        ))

    sampled = SampledSection(
        trials=len(estimates),
        theta_histogram=dict(sorted(histogram.items())),
        angle_failure_frequency=failures / len(estimates),
        mean_fidelity=float(np.mean(fidelities)),
        min_fidelity=float(np.min(fidelities)),
        bound_violations=violations if check_bound else None,
        rows=rows,
    )
    return sampled, violations


def _stage_summaries(trace) -> list[StageSummary]:
    return [
        StageSummary(
            stage=entry.stage, bit_weight=entry.bit_weight, favored=list(entry.favored),
            suppression=entry.suppression, theta=entry.theta, theta_prime=entry.theta_prime, T=entry.T,
            iterations=entry.iterations, fidelity=entry.fidelity, predicted_fidelity=entry.predicted_fidelity,
        )
        for entry in trace
    ]


def _run_general(ctx: RunContext, algorithm: DetAlgorithm):
    U, _ = _prior_state(ctx)
    table = TableLikelihood(ctx.likelihood.values(ctx.space))
    reference = general_update(U, table, algorithm.K, ThetaSource("exact_classical"),
                               mode=algorithm.mode, conjugation=algorithm.conjugation)
    exact = ExactSection(**_exact_base(ctx), fidelity=reference.final_fidelity,
                         stages=_stage_summaries(reference.trace))

    sampled = None
    if ctx.config.trials > 0:
        seed = ctx.config.master_seed
        source = ThetaSource(algorithm.theta_source, algorithm.m, algorithm.epsilon)

        def trial(index: int):
            if source.kind == "exact_classical":
                return reference
            return general_update(U, table, algorithm.K, source, rng=make_streams(seed, index).stage,
                                  mode=algorithm.mode, conjugation=algorithm.conjugation)

        results = run_trials(ctx.config.trials, trial)
        rows = [
            TrialRow(trial=index, stage=entry.stage, outcome=entry.angle_outcome, fidelity=entry.fidelity)
            for index, result in enumerate(results)
            for entry in result.trace
        ]
        finals = [result.final_fidelity for result in results]
        sampled = SampledSection(
            trials=len(results), mean_fidelity=float(np.mean(finals)), min_fidelity=float(np.min(finals)), rows=rows,
        )

    if algorithm.mode == "closest_integer":
        tolerance, detail = 1.0, "closest_integer carries no fidelity guarantee"
    else:
        tolerance, detail = 10.0 * 2.0 ** (-algorithm.K), None
    oracle = OracleCheck(
        fidelity=reference.final_fidelity,
        total_variation=total_variation(reference.state.probabilities(), ctx.oracle.posterior.p),
        tolerance=tolerance,
        passed=1.0 - reference.final_fidelity <= tolerance,
        detail=detail,
    )
    return exact, sampled, oracle


def run_estimate_theta(ctx: RunContext) -> tuple[ExactSection, Optional[SampledSection], OracleCheck]:
    algorithm = _det_algorithm(ctx)
    favored, r = _favored_model(ctx)
    U, _ = _prior_state(ctx)
    theta = exact_theta(ctx.prior, favored)
    estimator = PhaseEstimator(U, favored, algorithm.m, algorithm.epsilon, algorithm.conjugation)
    failure = estimator.failure_probability()
    exact = ExactSection(
        **_exact_base(ctx),
        theta=theta,
        theta_distribution={angle_key(a): p for a, p in estimator.folded_distribution().items()},
        angle_failure_probability=failure,
        ancillas=estimator.t,
    )
    if _bound_applies(r, algorithm):
        exact.fidelity_bound = modal_fidelity_bound(estimator, theta)

    seed = ctx.config.master_seed
    estimates = run_trials(ctx.config.trials, lambda index: estimator.sample(make_streams(seed, index).stage(0)))
    sampled = None
    if estimates:
        histogram = {}
        for estimate in estimates:
            key = angle_key(estimate.theta)
            histogram[key] = histogram.get(key, 0) + 1
        failures = sum(1 for e in estimates if abs(e.theta - theta) > e.delta)
        sampled = SampledSection(
            trials=len(estimates),
            theta_histogram=dict(sorted(histogram.items())),
            angle_failure_frequency=failures / len(estimates),
            rows=[TrialRow(trial=i, stage=0, p_exact=e.probability, outcome=e.outcome) for i, e in enumerate(estimates)],
        )

    oracle = OracleCheck(
        tolerance=algorithm.epsilon,
        passed=failure <= algorithm.epsilon + BOUND_SLACK,
        detail=f"exact failure probability {failure:.12f}",
    )
    return exact, sampled, oracle


def run_decompose(ctx: RunContext) -> tuple[ExactSection, None, OracleCheck]:
    algorithm = ctx.config.algorithm
    K = algorithm.K if isinstance(algorithm, DetAlgorithm) else settings.DEFAULT_FRACTIONAL_BITS
    table = ctx.likelihood.values(ctx.space)
    stages = decompose_general_model(table, ctx.prior.support, K, allow_elimination=True)
    rebuilt = reconstruct_likelihood(stages, ctx.space)

    kept = [h for h in sorted(ctx.prior.support) if table[h] > 0]
    floor_value = min(table[h] for h in kept)
    error = max(abs(math.log2(rebuilt[h]) - math.log2(table[h] / floor_value)) for h in kept)
    weights = ctx.prior.p * rebuilt
    exact = ExactSection(
        **_exact_base(ctx),
        stages=[
            StageSummary(stage=i, bit_weight=s.bit_weight, favored=sorted(s.favored), suppression=s.suppression)
            for i, s in enumerate(stages)
        ],
    )
    oracle = OracleCheck(
        fidelity=float(np.sqrt(weights / weights.sum()) @ np.sqrt(ctx.oracle.posterior.p)),
        total_variation=total_variation(weights / weights.sum(), ctx.oracle.posterior.p),
        tolerance=2.0 ** (-K),
        passed=error <= 2.0 ** (-K) + BOUND_SLACK,
        detail=f"max |log2 reconstructed - log2 L| = {error:.3e}",
    )
    return exact, None, oracle


RUNNERS = {
    "update prob": run_prob,
    "update det": run_det,
    "estimate-theta": run_estimate_theta,
    "bound": run_bound,
    "decompose": run_decompose,
}


def default_verb(config: ExperimentConfig) -> str:
    return "update prob" if isinstance(config.algorithm, ProbAlgorithm) else "update det"


def run_experiment(config: ExperimentConfig, verb: Optional[str] = None) -> RunReport:
    verb = verb or default_verb(config)
    runner_verb = default_verb(config) if verb == "verify" else verb
    if runner_verb not in RUNNERS:
        raise ConfigException(f"Unknown verb '{verb}'")

    run_id = f"{verb.replace(' ', '-')}:{config.master_seed}"
    started_at = datetime.utcnow().isoformat()
    start = time.perf_counter()
    logger.info(f"Starting {verb} with {config.trials} trials", run_id=run_id)

    space = resolve_space(config)
    prior = resolve_prior(config)
    likelihood = resolve_likelihood(config)
    oracle = bayes_posterior(prior, likelihood)
    ctx = RunContext(config, verb, run_id, space, prior, likelihood, oracle)

    exact, sampled, check = RUNNERS[runner_verb](ctx)
    report = RunReport(
        verb=verb,
        master_seed=config.master_seed,
        config=config.model_dump(by_alias=True, mode="json"),
        exact=exact,
        sampled=sampled,
        oracle=check,
        timing=TimingSection(started_at=started_at, elapsed_seconds=time.perf_counter() - start),
    )
    logger.info(f"Finished {verb}: oracle passed={check.passed}", run_id=run_id)

    if verb == "verify" and not check.passed:
        logger.error(f"Oracle comparison failed: {check.detail or check.fidelity}", run_id=run_id)
        raise ContractViolationException(
            f"Oracle comparison outside tolerance {check.tolerance:g} (fidelity={check.fidelity})"
        )
    return report
