"""
Tests for deterministic updating
"""
import math

import numpy as np
import pytest

from det_update.grover import build_grover_operator, exact_theta
from det_update.phase_estimation import AngleEstimate, PhaseEstimator, ancilla_count, estimate_theta, fold_outcome
from det_update.pipeline import ThetaSource, general_update
from det_update.planning import (
    fidelity_bound,
    iteration_plan,
    plane_operator,
    posterior_angle,
    predicted_fidelity,
    solve_fractional_phases,
)
from det_update.update import apply_deterministic_update, fractional_power, two_valued_target
from models.distributions import HypothesisSpace, PriorDistribution
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.gates import Composite
from quantum_core.measurement import fidelity
from quantum_core.preparation import prepare_prior_circuit
from quantum_core.state import StateVector
from shared.utils.exceptions import ConfigException, DegenerateAngleException


def law_state(operator, k):
    """sin((2k+1) theta/2)|alpha> + cos((2k+1) theta/2)|beta>"""
    angle = (2 * k + 1) * operator.theta / 2
    return StateVector.from_amplitudes(
        np.sin(angle) * operator.alpha + np.cos(angle) * operator.beta, normalize=True
    )


def iterate(U, operator, k):
    return apply_circuit(StateVector.zero(U.register_width), Circuit((Composite(U), *[Composite(operator.circuit)] * k), U.register_width))


def random_instance(rng, n):
    space = HypothesisSpace(n)
    prior = PriorDistribution.random(space, int(rng.integers(2 ** 31)))
    size = int(rng.integers(1, space.size))
    favored = frozenset(int(h) for h in rng.choice(space.size, size=size, replace=False))
    return prior, favored


class TestGroverOperator:
    """Test A and its rotation law"""

    @pytest.mark.parametrize("favored, expected", [
        ({3}, math.pi / 3),
        ({2, 3}, math.pi / 2),
        ({0, 1, 2, 3}, math.pi),
    ])
    def test_exact_theta(self, uniform4, favored, expected):
        assert exact_theta(uniform4, favored) == pytest.approx(expected, abs=1e-12)

    def test_exact_theta_zero_mass(self, space4):
        prior = PriorDistribution(space4, np.array([0.5, 0.5, 0.0, 0.0]))
        with pytest.raises(DegenerateAngleException):
            exact_theta(prior, {2, 3})

    def test_operator_angle_matches_classical(self, uniform4_circuit):
        operator = build_grover_operator(uniform4_circuit, {3})
        assert operator.theta == pytest.approx(math.pi / 3, abs=1e-12)

    def test_empty_favored(self, uniform4_circuit):
        with pytest.raises(DegenerateAngleException):
            build_grover_operator(uniform4_circuit, set())

    def test_unknown_conjugation(self, uniform4_circuit):
        with pytest.raises(ConfigException):
            build_grover_operator(uniform4_circuit, {3}, conjugation="sideways")

    def test_rotation_law_on_random_instances(self):
        """|<alpha|A^k U|0>| = |sin((2k+1) theta / 2)| and nothing leaks out of span{alpha, beta}"""
        rng = np.random.default_rng(31)
        checked = 0
        while checked < 50:
            prior, favored = random_instance(rng, int(rng.integers(1, 6)))
            if prior.mass(favored) <= 1e-6:
                continue
            U = prepare_prior_circuit(prior)
            operator = build_grover_operator(U, favored)
            for k in range(6):
                amplitudes = iterate(U, operator, k).amplitudes
                along_alpha = np.vdot(operator.alpha, amplitudes)
                along_beta = np.vdot(operator.beta, amplitudes)
                assert abs(along_alpha) == pytest.approx(abs(math.sin((2 * k + 1) * operator.theta / 2)), abs=1e-9)
                leak = amplitudes - along_alpha * operator.alpha - along_beta * operator.beta
                assert np.linalg.norm(leak) <= 1e-10
            checked += 1

    def test_printed_order_breaks_the_law(self):
        """Conjugating the other way round is not the same operator"""
        prior = PriorDistribution.random(HypothesisSpace(2), 17)
        U = prepare_prior_circuit(prior)
        printed = build_grover_operator(U, {1}, conjugation="printed")
        reference = build_grover_operator(U, {1})
        worst = min(fidelity(iterate(U, printed, k), law_state(reference, k)) for k in range(1, 4))
        assert worst < 1 - 1e-6

    def test_prior_amplitudes(self, uniform4_circuit):
        operator = build_grover_operator(uniform4_circuit, {0, 2})
        np.testing.assert_allclose(operator.prior_amplitudes, np.full(4, 0.5), atol=1e-12)


class TestIterationPlan:
    """Test the planning formulas"""

    def test_elimination_uniform4(self):
        plan = iteration_plan(math.pi / 3, math.inf)
        assert plan.theta_prime == math.pi
        assert plan.T == pytest.approx(1.0)
        assert plan.whole_iterations == 1
        assert plan.remainder == 0.0

    def test_two_valued(self):
        plan = iteration_plan(math.pi / 2, 3.0)
        assert plan.theta_prime == pytest.approx(2 * math.pi / 3)
        assert plan.T == pytest.approx(1 / 6)
        assert plan.rounded_iterations == 0

    def test_suppression_near_one(self):
        plan = iteration_plan(1.0, 1.0 + 1e-9)
        assert plan.theta_prime == pytest.approx(1.0, abs=1e-6)
        assert plan.T == pytest.approx(0.0, abs=1e-6)

    def test_unit_suppression_is_a_no_op(self):
        plan = iteration_plan(1.0, 1.0)
        assert plan.theta_prime == pytest.approx(1.0, abs=1e-12)
        assert plan.T == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(ConfigException, match="must be >= 1"):
            iteration_plan(1.0, 0.999)

    def test_monotone_in_suppression(self):
        angles = [posterior_angle(0.7, r) for r in (1.5, 2.0, 5.0, 50.0, 1e6)]
        assert angles == sorted(angles)
        assert all(a < math.pi for a in angles)

    @pytest.mark.parametrize("theta, r", [(0.0, 2.0), (4.0, 2.0), (1.0, 0.5)])
    def test_invalid_inputs(self, theta, r):
        with pytest.raises(ConfigException):
            iteration_plan(theta, r)

    def test_half_rounds_up(self):
        plan = iteration_plan(math.pi / 5, math.inf)
        assert plan.T == pytest.approx(2.0)
        assert iteration_plan(math.pi / 4, math.inf, "closest_integer").rounded_iterations == 2

    def test_predicted_fidelity(self):
        plan = iteration_plan(math.pi / 2, 3.0)
        assert predicted_fidelity(plan, 0) == pytest.approx(math.cos(math.pi / 12))
        assert predicted_fidelity(plan, plan.T) == pytest.approx(1.0)

    def test_fidelity_bound_formula(self):
        estimate = AngleEstimate(math.pi / 4, 3, 0.125, 6, math.pi / 4, 8, 0.5)
        assert fidelity_bound(estimate, delta=0.1) == pytest.approx(1 - (math.pi * 0.1 / (math.pi / 2)) ** 2)
        assert fidelity_bound(estimate) == pytest.approx(1 - (math.pi / 2) ** 2)


class TestFractionalPhases:
    def test_plane_operator_is_unitary(self):
        matrix = plane_operator(0.9, 0.4, -1.3)
        np.testing.assert_allclose(matrix @ matrix.conj().T, np.eye(2), atol=1e-12)

    def test_standard_phases_rotate_by_theta(self):
        theta = 0.8
        image = plane_operator(theta, math.pi, math.pi) @ np.array([math.sin(theta / 2), math.cos(theta / 2)])
        target = np.array([math.sin(1.5 * theta), math.cos(1.5 * theta)])
        assert abs(np.vdot(target, image)) == pytest.approx(1.0, abs=1e-12)

    def test_solver_reaches_partial_rotation(self):
        theta = math.pi / 2
        phases = solve_fractional_phases(theta, theta / 2, math.pi / 3)
        start = np.array([math.sin(theta / 2), math.cos(theta / 2)])
        target = np.array([math.sin(math.pi / 3), math.cos(math.pi / 3)])
        image = plane_operator(theta, phases.marked_phase, phases.zero_phase) @ start
        assert abs(np.vdot(target, image)) >= 1 - 1e-9


class TestDeterministicUpdate:
    """Test the single-stage update"""

    def test_elimination_uniform4(self, uniform4_circuit):
        plan = iteration_plan(math.pi / 3, math.inf)
        state, achieved, new_U = apply_deterministic_update(uniform4_circuit, {3}, plan)
        assert achieved >= 1 - 1e-12
        assert fidelity(state, StateVector.basis(2, 3)) >= 1 - 1e-12
        assert new_U.register_width == 2

    def test_fractional_final_two_valued(self, uniform4_circuit):
        """r = 3 on a half-mass favored set is exact with a fractional last step"""
        plan = iteration_plan(math.pi / 2, 3.0)
        result = apply_deterministic_update(uniform4_circuit, {0, 1}, plan, mode="fractional_final")
        assert result.achieved_fidelity >= 1 - 1e-9
        assert result.phases is not None
        np.testing.assert_allclose(result.target.probabilities(), [0.375, 0.375, 0.125, 0.125], atol=1e-12)

    def test_closest_integer_two_valued(self, uniform4_circuit):
        plan = iteration_plan(math.pi / 2, 3.0, "closest_integer")
        result = apply_deterministic_update(uniform4_circuit, {0, 1}, plan)
        assert result.iterations == 0
        assert result.achieved_fidelity == pytest.approx(math.cos(math.pi / 12), abs=1e-9)
        assert result.predicted_fidelity == pytest.approx(math.cos(math.pi / 12), abs=1e-12)

    def test_fractional_power_mode(self, uniform4_circuit):
        plan = iteration_plan(math.pi / 2, 3.0, "fractional_power")
        result = apply_deterministic_update(uniform4_circuit, {0, 1}, plan)
        assert result.achieved_fidelity >= 1 - 1e-9

    def test_new_circuit_prepares_posterior(self, uniform4_circuit):
        plan = iteration_plan(math.pi / 2, 3.0)
        result = apply_deterministic_update(uniform4_circuit, {0, 1}, plan)
        again = apply_circuit(StateVector.zero(2), result.new_U)
        assert fidelity(again, result.target) >= 1 - 1e-9

    def test_unknown_mode(self, uniform4_circuit):
        with pytest.raises(ConfigException):
            apply_deterministic_update(uniform4_circuit, {3}, iteration_plan(math.pi / 3, math.inf), mode="bogus")

    def test_two_valued_target(self):
        target = two_valued_target(np.full(4, 0.5), frozenset({0}), 2.0)
        np.testing.assert_allclose(target.probabilities(), [0.4, 0.2, 0.2, 0.2], atol=1e-12)

    def test_fractional_power_identity_and_square_root(self):
        np.testing.assert_allclose(fractional_power(np.eye(4), 0.37), np.eye(4), atol=1e-12)
        z = np.diag([1.0, -1.0])
        root = fractional_power(z, 0.5)
        np.testing.assert_allclose(root @ root, z, atol=1e-12)


class TestPhaseEstimation:
    """Angle estimation on the Grover operator"""

    def test_ancilla_count(self):
        assert ancilla_count(3, 1 / 8) == 6

    @pytest.mark.parametrize("m, epsilon", [(0, 0.1), (3, 0.0), (3, 0.5)])
    def test_ancilla_count_rejects(self, m, epsilon):
        with pytest.raises(ConfigException):
            ancilla_count(m, epsilon)

    def test_fold(self):
        assert fold_outcome(11, 6) == pytest.approx(2 * math.pi * 11 / 64)
        assert fold_outcome(53, 6) == pytest.approx(2 * math.pi * 11 / 64)
        assert fold_outcome(0, 6) == pytest.approx(2 * math.pi / 64)

    def test_most_likely_outcome(self, uniform4_circuit):
        estimator = PhaseEstimator(uniform4_circuit, {3}, 3, 0.125)
        folded = estimator.folded_distribution()
        assert max(folded, key=folded.get) == pytest.approx(2 * math.pi * 11 / 64)
        assert sum(folded.values()) == pytest.approx(1.0, abs=1e-12)

    def test_exact_grid_angle(self, uniform4_circuit):
        estimator = PhaseEstimator(uniform4_circuit, {2, 3}, 3, 0.125)
        folded = estimator.folded_distribution()
        assert folded[math.pi / 2] == pytest.approx(1.0, abs=1e-12)
        assert estimator.failure_probability() == pytest.approx(0.0, abs=1e-12)

    def test_failure_probability_within_budget(self):
        rng = np.random.default_rng(8)
        for _ in range(8):
            prior, favored = random_instance(rng, 2)
            if prior.mass(favored) <= 1e-6:
                continue
            estimator = PhaseEstimator(prepare_prior_circuit(prior), favored, 3, 0.125)
            assert estimator.failure_probability() <= 0.125 + 1e-12

    def test_sampled_failure_frequency(self, uniform4_circuit):
        estimator = PhaseEstimator(uniform4_circuit, {3}, 3, 0.125)
        rng = np.random.default_rng(99)
        theta = math.pi / 3
        misses = sum(abs(estimator.sample(rng).theta - theta) > estimator.delta for _ in range(2000))
        assert misses / 2000 <= 0.125 + 3 * math.sqrt(0.125 / 2000)

    def test_estimate_theta_is_seeded(self, uniform4_circuit):
        first = estimate_theta(uniform4_circuit, {3}, 3, 0.125, np.random.default_rng(4))
        second = estimate_theta(uniform4_circuit, {3}, 3, 0.125, np.random.default_rng(4))
        assert first == second
        assert first.t == 6

    def test_modal_estimate(self, uniform4_circuit):
        modal = PhaseEstimator(uniform4_circuit, {3}, 3, 0.125).modal_estimate()
        assert modal.theta == pytest.approx(2 * math.pi * 11 / 64)
        assert modal.outcome in (11, 53)

    @pytest.mark.parametrize("mode", ["fractional_final", "fractional_power"])
    def test_fidelity_bound_holds_for_sampled_estimates(self, uniform4_circuit, mode):
        """Every sampled estimate, failed or not, meets 1 - (pi Delta / 2 theta_est)^2 after elimination"""
        estimator = PhaseEstimator(uniform4_circuit, {3}, 3, 0.125)
        rng = np.random.default_rng(99)
        theta = math.pi / 3
        measured = {}
        for _ in range(2000):
            estimate = estimator.sample(rng)
            if estimate.theta not in measured:
                plan = iteration_plan(estimate.theta, math.inf, mode)
                measured[estimate.theta] = apply_deterministic_update(uniform4_circuit, {3}, plan).achieved_fidelity
            bound = fidelity_bound(estimate, delta=abs(estimate.theta - theta))
            assert measured[estimate.theta] >= bound - 1e-9

    def test_fidelity_bound_holds_for_every_outcome(self, uniform4_circuit):
        """With the fractional power every folded angle meets the bound"""
        estimator = PhaseEstimator(uniform4_circuit, {3}, 3, 0.125)
        theta = math.pi / 3
        for y in range(2 ** estimator.t // 2 + 1):
            estimate = AngleEstimate(fold_outcome(y, estimator.t), 3, 0.125, estimator.t, estimator.delta, y, 0.0)
            plan = iteration_plan(estimate.theta, math.inf, "fractional_power")
            result = apply_deterministic_update(uniform4_circuit, {3}, plan)
            assert result.achieved_fidelity >= fidelity_bound(estimate, delta=abs(estimate.theta - theta)) - 1e-9


class TestGeneralUpdate:
    """Staged updating for general likelihood tables"""

    def test_dyadic_table(self, uniform4_circuit):
        result = general_update(uniform4_circuit, [0.5, 0.25, 0.125, 0.125], K=4)
        assert len(result.trace) == 2
        assert result.final_fidelity >= 1 - 1e-9
        np.testing.assert_allclose(result.posterior.p, [0.5, 0.25, 0.125, 0.125], atol=1e-12)
        state, trace, final = result
        assert final == result.final_fidelity

    @pytest.mark.slow
    def test_random_tables_converge(self):
        rng = np.random.default_rng(123)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            prior = PriorDistribution.random(HypothesisSpace(n), int(rng.integers(2 ** 31)))
            U = prepare_prior_circuit(prior)
            table = rng.uniform(2.0 ** -6, 1.0, size=2 ** n)
            coarse = general_update(U, table, K=4)
            fine = general_update(U, table, K=8)
            assert fine.final_fidelity >= 1 - 10 * 2.0 ** -8
            assert fine.final_fidelity >= coarse.final_fidelity - 1e-12

    def test_stage_angles_follow_intermediate_posterior(self, uniform4_circuit):
        result = general_update(uniform4_circuit, [0.5, 0.25, 0.125, 0.125], K=4)
        first, second = result.trace
        assert first.theta == pytest.approx(math.pi / 3, abs=1e-12)
        assert second.theta == pytest.approx(exact_theta(PriorDistribution(HypothesisSpace(2), np.array([4, 1, 1, 1]) / 7), {1}), abs=1e-12)

    def test_elimination_stage_for_zero_entries(self, uniform4_circuit):
        result = general_update(uniform4_circuit, [0.5, 0.25, 0.0, 0.25], K=4)
        assert math.isinf(result.trace[0].suppression)
        assert result.final_fidelity >= 1 - 1e-9

    def test_phase_estimated_angles(self, uniform4_circuit):
        source = ThetaSource("phase_estimation", m=3, epsilon=0.125)
        result = general_update(uniform4_circuit, [0.5, 0.25, 0.125, 0.125], K=4, theta_source=source, rng=np.random.default_rng(6))
        assert all(entry.angle_outcome is not None for entry in result.trace)
        assert 0.0 <= result.final_fidelity <= 1.0

    def test_constant_table_is_identity(self, uniform4_circuit):
        result = general_update(uniform4_circuit, [0.3] * 4, K=8)
        assert result.trace == ()
        assert result.final_fidelity >= 1 - 1e-12

    def test_size_mismatch(self, uniform4_circuit):
        with pytest.raises(ConfigException):
            general_update(uniform4_circuit, [0.5, 0.5], K=4)

    def test_unknown_theta_source(self):
        with pytest.raises(ConfigException):
            ThetaSource("oracle")
