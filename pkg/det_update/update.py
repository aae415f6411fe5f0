from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np
from scipy.linalg import schur

from det_update.grover import Conjugation, build_grover_operator
from det_update.planning import FractionalPhases, IterationPlan, predicted_fidelity, solve_fractional_phases
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.gates import Composite, UnitaryGate
from quantum_core.measurement import fidelity
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, ContractViolationException
from shared.utils.logger import get_logger

logger = get_logger("det_update", settings.LOG_LEVEL)


@dataclass(frozen=True, eq=False)
class DeterministicResult:
    state: StateVector
    achieved_fidelity: float
    new_U: Circuit
    target: StateVector
    iterations: int
    predicted_fidelity: float
    phases: Optional[FractionalPhases] = None

    def __iter__(self) -> Iterator:
        return iter((self.state, self.achieved_fidelity, self.new_U))


def fractional_power(matrix: np.ndarray, exponent: float) -> np.ndarray:
    """Principal-branch real power of a unitary through its complex Schur form"""
    triangular, vectors = schur(np.asarray(matrix, dtype=complex), output="complex")
    eigenvalues = np.diag(triangular)
    powered = np.exp(1j * exponent * np.angle(eigenvalues))
    return (vectors * powered) @ vectors.conj().T


def two_valued_target(prior_amplitudes: np.ndarray, favored: frozenset, r: float) -> StateVector:
    """Exact posterior state for a two-valued model with suppression r (r = inf eliminates the rest)"""
    weights = np.abs(prior_amplitudes) ** 2
    mask = np.zeros(weights.size, dtype=bool)
    mask[sorted(favored)] = True
    if math.isinf(r):
        posterior = np.where(mask, weights, 0.0)
    else:
        posterior = np.where(mask, weights * r, weights)
    return StateVector.from_amplitudes(np.sqrt(posterior), normalize=True)


def apply_deterministic_update(
    U: Circuit,
    favored: Iterable[int],
    plan: IterationPlan,
    mode: Optional[str] = None,
    conjugation: Conjugation = "prior",
) -> DeterministicResult:
    """
    Apply the planned Grover iterations to U|0> and compare with the exact posterior.

    closest_integer applies round(T) iterations; fractional_final applies
    floor(T) iterations and one A(phi, chi) with solved phases; fractional_power
    applies the real power A^T.
    """
    mode = mode or plan.mode
    n = U.register_width
    favored = frozenset(int(h) for h in favored)
    operator = build_grover_operator(U, favored, conjugation=conjugation)
    prior_amplitudes = apply_circuit(StateVector.zero(n), U).amplitudes
    target = two_valued_target(prior_amplitudes, favored, plan.suppression)
    step = Composite(operator.circuit)

    phases = None
    if mode == "closest_integer":
        iterations = plan.rounded_iterations
        gates = [Composite(U), *([step] * iterations)]
        predicted = predicted_fidelity(plan, iterations)
    elif mode == "fractional_final":
        iterations = plan.whole_iterations
        gates = [Composite(U), *([step] * iterations)]
        if plan.remainder > settings.NORM_TOLERANCE:
            start_angle = (2 * iterations + 1) * plan.theta / 2.0
            phases = solve_fractional_phases(plan.theta, start_angle, plan.theta_prime / 2.0)
            partial = build_grover_operator(U, favored, phases.marked_phase, phases.zero_phase, conjugation)
            gates.append(Composite(partial.circuit))
        predicted = 1.0
    elif mode == "fractional_power":
        iterations = plan.whole_iterations
        gates = [Composite(U)]
        if plan.T > settings.NORM_TOLERANCE:
            powered = fractional_power(operator.circuit.unitary, plan.T)
            gates.append(UnitaryGate(powered, n, label=f"A^{plan.T:.6f}"))
        predicted = predicted_fidelity(plan, plan.T)
    else:
        raise ConfigException(f"Unknown iteration mode '{mode}'")

    new_U = Circuit(tuple(gates), n, label=f"{U.label}>{sorted(favored)}")
    state = apply_circuit(StateVector.zero(n), new_U)
    achieved = fidelity(state, target)

    exact_plan = math.isclose(plan.theta, operator.theta, rel_tol=0.0, abs_tol=1e-9)
    if phases is not None and exact_plan and achieved < 1.0 - 10 * settings.FRACTIONAL_FIDELITY_TARGET:
        logger.error(f"Fractional step reached fidelity {achieved:.12f}")
        raise ContractViolationException(f"Fractional final step reached fidelity {achieved:.12f} only")

    logger.debug(
        f"Deterministic update: mode={mode} T={plan.T:.12f} iterations={iterations} "
        f"fidelity={achieved:.12f} predicted={predicted:.12f}"
    )
    return DeterministicResult(state, achieved, new_U, target, iterations, predicted, phases)
