"""
Tests for probabilistic updating
"""
import math

import numpy as np
import pytest

import prob_update.updater as updater_module
from models.bayes import bayes_posterior, max_likelihood_over_support
from models.distributions import HypothesisSpace, PriorDistribution
from models.likelihood import TableLikelihood
from prob_update.rotation import build_update_rotation, rotation_amplitudes
from prob_update.updater import (
    SUCCESS_OUTCOME,
    BoundSchedule,
    ProbabilisticUpdater,
    ShotConfig,
    failure_state,
    iterative_update,
    kraus_success_probability,
    single_shot_update,
    success_probability_bound,
)
from quantum_core.measurement import fidelity
from quantum_core.preparation import amplitude_state, prior_state
from quantum_core.state import StateVector
from shared.utils.exceptions import (
    ConfigException,
    ContractViolationException,
    InvalidRotationException,
    ZeroEvidenceException,
)


def success_branch(record, n):
    return StateVector.from_amplitudes(record.rotated_state.register_block(n, SUCCESS_OUTCOME), normalize=True)


class TestRotation:
    """Test the conditional ancilla rotation"""

    def test_amplitudes(self):
        amplitudes = rotation_amplitudes(np.array([0.5, 0.25, 0.0]), 2.0, None, range(3))
        np.testing.assert_allclose(amplitudes, [1.0, np.sqrt(0.5), 0.0])

    def test_rotation_too_large(self):
        with pytest.raises(InvalidRotationException) as excinfo:
            rotation_amplitudes(np.array([0.5, 0.25]), 4.0, None, range(2))
        assert "h=0" in str(excinfo.value)
        assert excinfo.value.exit_code == 1

    def test_off_support_clamped(self):
        amplitudes = rotation_amplitudes(np.array([0.9, 0.2]), 5.0, None, [1])
        assert amplitudes[0] == 1.0

    def test_circuit_width(self, space4, worked_likelihood):
        circuit = build_update_rotation(worked_likelihood, 2.0, space=space4)
        assert circuit.register_width == 3


class TestSingleShot:
    """Single ancilla rotation and measurement"""

    def test_worked_model(self, worked_state, worked_likelihood, uniform4):
        """c^2 = 1/max L = 2 gives success probability 0.5 and the exact posterior"""
        updater = ProbabilisticUpdater(worked_state, worked_likelihood, [2.0], uniform4)
        assert updater.exact_stage_probabilities[0] == pytest.approx(0.5, abs=1e-12)
        posterior = amplitude_state(np.array([0.5, 0.25, 0.125, 0.125]))
        assert fidelity(success_branch(updater.stages[0], 2), posterior) >= 1 - 1e-12

    @pytest.mark.parametrize("mode, bound, expected", [
        ("trivial", None, 0.25),
        ("bound", 0.5, 0.5),
        ("exact_max", None, 0.5),
    ])
    def test_c_squared_modes(self, uniform4, worked_likelihood, mode, bound, expected):
        c2 = ShotConfig(mode, bound).resolve(uniform4, worked_likelihood)
        updater = ProbabilisticUpdater(prior_state(uniform4), worked_likelihood, [c2], uniform4)
        assert updater.exact_stage_probabilities[0] == pytest.approx(expected, abs=1e-12)

    def test_bound_mode_validates(self):
        with pytest.raises(ConfigException):
            ShotConfig("bound", None)
        with pytest.raises(ConfigException):
            ShotConfig("bound", 1.5)

    def test_too_small_bound(self, uniform4, worked_likelihood):
        c2 = ShotConfig("bound", 0.25).resolve(uniform4, worked_likelihood)
        with pytest.raises(InvalidRotationException):
            ProbabilisticUpdater(prior_state(uniform4), worked_likelihood, [c2], uniform4)

    def test_random_pairs_reach_posterior(self):
        """Success branch matches the Bayesian posterior for random priors and tables"""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            space = HypothesisSpace(n)
            prior = PriorDistribution.random(space, int(rng.integers(2 ** 31)))
            likelihood = TableLikelihood(rng.uniform(0.01, 1.0, size=space.size))
            c2 = 1.0 / max_likelihood_over_support(prior, likelihood)
            updater = ProbabilisticUpdater(prior_state(prior), likelihood, [c2], prior)
            posterior = amplitude_state(bayes_posterior(prior, likelihood).posterior.p)
            assert fidelity(success_branch(updater.stages[0], n), posterior) >= 1 - 1e-12

    def test_exact_max_exhausts_the_maximum(self):
        """c^2 P(d|h) = 1 at the likelihood maximum leaves no failure amplitude there"""
        space = HypothesisSpace(1)
        prior = PriorDistribution.uniform(space)
        likelihood = TableLikelihood(np.array([0.2, 0.36]))
        updater = ProbabilisticUpdater(prior_state(prior), likelihood, [1.0 / 0.36], prior)
        assert updater.exact_stage_probabilities[0] == pytest.approx(0.28 / 0.36, abs=1e-12)
        assert updater.stages[0].failure.residual_profile[1] == 0.0

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_random_exact_max_instances(self, n):
        """Exact-max shots build for random tables and hit the success bound"""
        rng = np.random.default_rng(500 + n)
        space = HypothesisSpace(n)
        for _ in range(100):
            prior = PriorDistribution.random(space, int(rng.integers(2 ** 31)))
            likelihood = TableLikelihood(rng.uniform(0.01, 1.0, size=space.size))
            c2 = ShotConfig("exact_max").resolve(prior, likelihood)
            updater = ProbabilisticUpdater(prior_state(prior), likelihood, [c2], prior)
            expected = success_probability_bound(prior, likelihood)
            assert updater.exact_stage_probabilities[0] == pytest.approx(expected, abs=1e-12)

    def test_success_probability_bound(self, uniform4, worked_likelihood):
        assert success_probability_bound(uniform4, worked_likelihood) == pytest.approx(0.5)

    @pytest.mark.parametrize("prior_p, expected", [
        ([0.0, 0.5, 0.5, 0.0], 1),
        ([0.0, 0.0, 0.5, 0.5], 3),
    ])
    def test_orthogonal_posteriors(self, space4, prior_p, expected):
        """Overlapping priors are updated to orthogonal basis states"""
        prior = PriorDistribution(space4, np.array(prior_p))
        likelihood = TableLikelihood(np.array([0.7, 0.7, 0.0, 0.7]))
        c2 = ShotConfig("exact_max").resolve(prior, likelihood)
        updater = ProbabilisticUpdater(prior_state(prior), likelihood, [c2], prior)
        assert updater.exact_stage_probabilities[0] == pytest.approx(0.5, abs=1e-12)
        assert fidelity(success_branch(updater.stages[0], 2), StateVector.basis(2, expected)) >= 1 - 1e-12

    def test_zero_evidence(self, space4):
        prior = PriorDistribution.point(space4, 2)
        likelihood = TableLikelihood(np.array([0.5, 0.5, 0.0, 0.5]))
        with pytest.raises(ZeroEvidenceException):
            ProbabilisticUpdater(prior_state(prior), likelihood, [1.0], prior)

    def test_seeded_run_is_reproducible(self, worked_state, worked_likelihood, uniform4):
        config = ShotConfig("exact_max")
        first = single_shot_update(worked_state, worked_likelihood, config, np.random.default_rng(5), uniform4)
        second = single_shot_update(worked_state, worked_likelihood, config, np.random.default_rng(5), uniform4)
        assert first.success == second.success
        np.testing.assert_array_equal(first.state.amplitudes, second.state.amplitudes)


class TestIterativeUpdate:
    """Re-rotation of the failure branch under a bound schedule"""

    def test_schedule_constants(self):
        assert BoundSchedule((1.0, 0.5)).c_squared() == pytest.approx((1.0, 1.0))
        assert BoundSchedule((0.8, 0.5, 0.25)).c_squared() == pytest.approx((1.25, 0.75, 2.0))

    @pytest.mark.parametrize("bounds", [(0.5, 0.7), (0.5, 0.5), (), (1.2,)])
    def test_bad_schedule(self, bounds):
        with pytest.raises(ConfigException):
            BoundSchedule(bounds)

    def test_two_stage_worked_model(self, worked_state, worked_likelihood, uniform4):
        updater = ProbabilisticUpdater(worked_state, worked_likelihood, BoundSchedule((1.0, 0.5)).c_squared(), uniform4)
        assert updater.exact_stage_probabilities == pytest.approx((0.25, 1 / 3), abs=1e-12)
        assert updater.cumulative_success == pytest.approx(0.5, abs=1e-12)
        posterior = amplitude_state(np.array([0.5, 0.25, 0.125, 0.125]))
        for record in updater.stages:
            assert fidelity(success_branch(record, 2), posterior) >= 1 - 1e-12

    def test_schedule_ending_at_the_maximum(self, worked_state, worked_likelihood, uniform4):
        """A final bound equal to max P(d|h) exhausts that hypothesis without a contract error"""
        updater = ProbabilisticUpdater(worked_state, worked_likelihood, BoundSchedule((1.0, 0.5)).c_squared(), uniform4)
        assert len(updater.stages) == 2
        assert updater.stages[1].failure.residual_profile[0] == 0.0
        np.testing.assert_allclose(updater.stages[1].failure.residual_profile[1:] ** 2, [0.5, 0.75, 0.75])

    def test_failure_branch_closed_form(self, worked_state, worked_likelihood, uniform4):
        updater = ProbabilisticUpdater(worked_state, worked_likelihood, [1.0, 1.0], uniform4)
        expected = failure_state(uniform4, worked_likelihood, 1.0)
        np.testing.assert_allclose(updater.stages[0].rotated_state.register_block(2, 1) / np.sqrt(0.75), expected, atol=1e-12)

    def test_random_schedules_stay_below_bound(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            space = HypothesisSpace(int(rng.integers(1, 4)))
            prior = PriorDistribution.random(space, int(rng.integers(2 ** 31)))
            likelihood = TableLikelihood(rng.uniform(0.05, 1.0, size=space.size))
            top = max_likelihood_over_support(prior, likelihood)
            bounds = np.sort(rng.uniform(top, 1.0, size=3))[::-1]
            bounds = tuple(dict.fromkeys(float(b) for b in bounds))
            updater = ProbabilisticUpdater(prior_state(prior), likelihood, BoundSchedule(bounds).c_squared(), prior)
            limit = success_probability_bound(prior, likelihood)
            assert updater.cumulative_success <= limit + 1e-12
            assert sum(s.c_squared for s in updater.stages) == pytest.approx(1.0 / bounds[len(updater.stages) - 1])

    def test_run_reports_reached_stage(self, worked_state, worked_likelihood, uniform4):
        outcome = iterative_update(worked_state, worked_likelihood, BoundSchedule((1.0, 0.5)), np.random.default_rng(3), uniform4)
        assert 1 <= outcome.stage_reached <= 2
        assert len(outcome.outcomes) == outcome.stage_reached
        assert outcome.success == (outcome.outcomes[-1] == SUCCESS_OUTCOME)

    def test_kraus_prediction_guards_the_first_stage(self, worked_state, worked_likelihood, uniform4, monkeypatch):
        assert kraus_success_probability(uniform4, worked_likelihood, 2.0) == pytest.approx(0.5)
        monkeypatch.setattr(updater_module, "kraus_success_probability", lambda prior, likelihood, c2: 0.0)
        with pytest.raises(ContractViolationException, match="Kraus prediction"):
            ProbabilisticUpdater(worked_state, worked_likelihood, [2.0], uniform4)


@pytest.mark.slow
class TestSampledFrequencies:
    """Seeded success frequencies against the exact cumulative success"""

    @pytest.mark.parametrize("c_squared", [(2.0,), (1.0, 1.0)])
    def test_frequency_within_four_sigma(self, worked_state, worked_likelihood, uniform4, c_squared):
        updater = ProbabilisticUpdater(worked_state, worked_likelihood, c_squared, uniform4)
        assert updater.cumulative_success == pytest.approx(0.5, abs=1e-12)
        rng = np.random.default_rng(2025)
        trials = 100_000
        successes = sum(updater.run(lambda _stage: rng).success for _ in range(trials))
        sigma = math.sqrt(0.25 / trials)
        assert abs(successes / trials - 0.5) <= 4 * sigma
