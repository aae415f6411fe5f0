from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from models.distributions import PriorDistribution
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.gates import Composite, PhaseOracle, ZeroConditionedPhase
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, DegenerateAngleException
from shared.utils.logger import get_logger

logger = get_logger("det_update", settings.LOG_LEVEL)

Conjugation = Literal["prior", "printed"]


@dataclass(frozen=True, eq=False)
class GroverOperator:
    """
    A = U Pi U^-1 O_d (conjugation "prior").

    ``alpha`` and ``beta`` are the normalized favored and disfavored components
    of U|0>; A rotates within their span by ``theta`` per application.
    """

    circuit: Circuit
    prior_circuit: Circuit
    favored: frozenset
    marked_phase: float
    zero_phase: float
    conjugation: Conjugation
    theta: float
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def prior_amplitudes(self) -> np.ndarray:
        return np.sin(self.theta / 2) * self.alpha + np.cos(self.theta / 2) * self.beta


def exact_theta(prior: PriorDistribution, favored: Iterable[int]) -> float:
    """theta = 2 arcsin(sqrt(S)) with S the prior mass of the favored set"""
    favored = prior.space.validate_subset(favored, "favored set")
    mass = prior.mass(favored)
    if mass <= 0.0:
        raise DegenerateAngleException("Favored set has zero prior probability (theta = 0)")
    return 2.0 * float(np.arcsin(np.sqrt(min(mass, 1.0))))


def split_prior(amplitudes: np.ndarray, favored: frozenset) -> tuple[float, np.ndarray, np.ndarray]:
    """(S, |alpha>, |beta>) for a prior state and a favored set"""
    mask = np.zeros(amplitudes.size, dtype=bool)
    mask[sorted(favored)] = True
    favored_part = np.where(mask, amplitudes, 0.0)
    other_part = np.where(mask, 0.0, amplitudes)
    mass = float(np.vdot(favored_part, favored_part).real)
    rest = float(np.vdot(other_part, other_part).real)
    alpha = favored_part / np.sqrt(mass) if mass > 0 else favored_part
    beta = other_part / np.sqrt(rest) if rest > 0 else other_part
    return mass, alpha, beta


def build_grover_operator(
    U: Circuit,
    favored: Iterable[int],
    marked_phase: float = np.pi,
    zero_phase: float = np.pi,
    conjugation: Conjugation = "prior",
) -> GroverOperator:
    n = U.register_width
    favored = frozenset(int(h) for h in favored)
    if not favored:
        raise DegenerateAngleException("Favored set is empty (theta = 0)")
    if any(h < 0 or h >= 2 ** n for h in favored):
        raise ConfigException(f"Favored set reaches outside a {n}-qubit register")

    amplitudes = apply_circuit(StateVector.zero(n), U).amplitudes
    mass, alpha, beta = split_prior(amplitudes, favored)
    if mass <= settings.PROBABILITY_TOLERANCE ** 2:
        raise DegenerateAngleException("Favored set does not meet the prior's support (theta = 0)")
    theta = 2.0 * float(np.arcsin(np.sqrt(min(mass, 1.0))))

    oracle = PhaseOracle(favored, marked_phase, n)
    reflection = ZeroConditionedPhase(zero_phase, n)
    if conjugation == "prior":
        gates = (oracle, Composite(U, adjoint=True), reflection, Composite(U))
    elif conjugation == "printed":
        gates = (oracle, Composite(U), reflection, Composite(U, adjoint=True))
    else:
        raise ConfigException(f"Unknown conjugation order '{conjugation}'")

    circuit = Circuit(gates, n, label=f"A[{U.label}]")
    logger.debug(f"Grover operator built: |H_d|={len(favored)} theta={theta:.12f} order={conjugation}")
    return GroverOperator(circuit, U, favored, marked_phase, zero_phase, conjugation, theta, alpha, beta)
