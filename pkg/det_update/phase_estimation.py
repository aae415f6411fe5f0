"""
Angle estimation by phase estimation on the Grover operator.

The register (qubits 0..n-1) is prepared with U; t phase ancillas sit on
qubits n..n+t-1, ancilla n+j controlling A^(2^j). The prior state is a
superposition of the eigenvectors of A with eigenphases +theta and -theta, so
outcomes y and 2^t - y describe the same angle and are folded together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from det_update.grover import Conjugation, GroverOperator, build_grover_operator
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.gates import Composite, Controlled, InverseQFT, hadamard_layer
from quantum_core.measurement import measure, outcome_probabilities
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException
from shared.utils.logger import get_logger

logger = get_logger("det_update", settings.LOG_LEVEL)


@dataclass(frozen=True)
class AngleEstimate:
    theta: float
    m: int
    epsilon: float
    t: int
    delta: float
    outcome: int
    probability: float


def ancilla_count(m: int, epsilon: float) -> int:
    """t = m + ceil(log2(2 + 1/(2 epsilon)))"""
    if m < 1:
        raise ConfigException(f"Accuracy bits m must be >= 1, got {m}")
    if not (0.0 < epsilon < 0.5):
        raise ConfigException(f"Failure budget epsilon must lie in (0, 1/2), got {epsilon}")
    return m + math.ceil(math.log2(2.0 + 1.0 / (2.0 * epsilon)))


def fold_outcome(y: int, t: int) -> float:
    """2 pi min(y, 2^t - y) / 2^t; y = 0 maps to the smallest grid angle"""
    size = 2 ** t
    folded = min(y, size - y)
    return 2.0 * math.pi * max(folded, 1) / size


def angle_error_bound(m: int) -> float:
    return 2.0 * math.pi * 2.0 ** (-m)


class PhaseEstimator:
    """
    Pre-measurement state of the phase-estimation circuit for one (U, H_d).

    The state is simulated once; ``sample`` draws outcomes from its exact
    marginal on the phase ancillas.
    """

    def __init__(
        self,
        U: Circuit,
        favored: Iterable[int],
        m: int,
        epsilon: float,
        conjugation: Conjugation = "prior",
        operator: Optional[GroverOperator] = None,
    ):
        self.m = int(m)
        self.epsilon = float(epsilon)
        self.t = ancilla_count(self.m, self.epsilon)
        self.operator = operator or build_grover_operator(U, favored, conjugation=conjugation)
        self.n = U.register_width
        width = self.n + self.t
        if width > settings.MAX_QUBITS:
            raise ConfigException(f"Phase estimation needs {width} qubits, above MAX_QUBITS={settings.MAX_QUBITS}")

        self.ancillas = tuple(range(self.n, width))
        self.circuit = self._build_circuit(U, width)
        self.state = apply_circuit(StateVector.zero(width), self.circuit)
        self._distribution = outcome_probabilities(self.state, self.ancillas)
        logger.debug(f"Phase estimation prepared: n={self.n} t={self.t} theta={self.operator.theta:.12f}")

    def _build_circuit(self, U: Circuit, width: int) -> Circuit:
        grover = self.operator.circuit
        gates = [Composite(U), *hadamard_layer(self.ancillas)]
        for j, control in enumerate(self.ancillas):
            gates.append(Controlled(control, Composite(grover.power(2 ** j))))
        gates.append(InverseQFT(self.n, self.t))
        return Circuit(tuple(gates), width, label=f"qpe[{U.label}]")

    @property
    def delta(self) -> float:
        return angle_error_bound(self.m)

    def outcome_distribution(self) -> np.ndarray:
        """Exact probability of every ancilla outcome y in 0..2^t-1"""
        return self._distribution.copy()

    def folded_distribution(self) -> dict[float, float]:
        """Exact probability of every folded angle estimate"""
        folded: dict[float, float] = {}
        for y, p in enumerate(self._distribution):
            if p <= 0.0:
                continue
            angle = fold_outcome(y, self.t)
            folded[angle] = folded.get(angle, 0.0) + float(p)
        return dict(sorted(folded.items()))

    def failure_probability(self) -> float:
        """Exact probability that |theta_est - theta| exceeds 2 pi 2^-m"""
        theta = self.operator.theta
        return float(sum(
            p for y, p in enumerate(self._distribution)
            if abs(fold_outcome(y, self.t) - theta) > self.delta
        ))

    def modal_estimate(self) -> AngleEstimate:
        """The most probable outcome as an estimate; ties go to the smaller outcome"""
        y = int(np.argmax(self._distribution))
        theta = fold_outcome(y, self.t)
        return AngleEstimate(theta, self.m, self.epsilon, self.t, self.delta, y, float(self._distribution[y]))

    def sample(self, rng: np.random.Generator) -> AngleEstimate:
        record = measure(self.state, self.ancillas, rng)
        theta = fold_outcome(record.outcome, self.t)
        return AngleEstimate(theta, self.m, self.epsilon, self.t, self.delta, record.outcome, record.probability)


def estimate_theta(
    U: Circuit,
    favored: Iterable[int],
    m: int,
    epsilon: float,
    rng: np.random.Generator,
    conjugation: Conjugation = "prior",
) -> AngleEstimate:
    return PhaseEstimator(U, favored, m, epsilon, conjugation).sample(rng)
