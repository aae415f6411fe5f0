from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, ContractViolationException


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome: int
    probability: float
    collapsed: StateVector


def _validate_qubits(state: StateVector, qubits: Sequence[int]) -> tuple[int, ...]:
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits):
        raise ConfigException(f"Measured qubits must be distinct, got {qubits}")
    for q in qubits:
        if q < 0 or q >= state.qubit_count:
            raise ConfigException(f"Qubit {q} outside a {state.qubit_count}-qubit state")
    return qubits


@lru_cache(maxsize=1024)
def _outcome_of_index(qubit_count: int, qubits: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(2 ** qubit_count, dtype=np.int64)
    values = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        values |= ((idx >> q) & 1) << j
    values.setflags(write=False)
    return values


def outcome_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Exact marginal distribution of the integer read from ``qubits`` (first entry least significant)"""
    qubits = _validate_qubits(state, qubits)
    values = _outcome_of_index(state.qubit_count, qubits)
    return np.bincount(values, weights=state.probabilities(), minlength=2 ** len(qubits))


def branch_probabilities(state: StateVector, qubit: int) -> tuple[float, float]:
    """Exact weights of the qubit's |0> and |1> subspaces; no collapse, no randomness"""
    p0, p1 = outcome_probabilities(state, [qubit])
    return float(p0), float(p1)


def _sample(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probabilities)
    outcome = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(outcome, probabilities.size - 1)


def measure(state: StateVector, qubits: Sequence[int], rng: np.random.Generator) -> MeasurementRecord:
    """Sample an outcome from the exact marginal and renormalize on its subspace"""
    qubits = _validate_qubits(state, qubits)
    probabilities = outcome_probabilities(state, qubits)
    outcome = _sample(probabilities, rng)
    weight = float(probabilities[outcome])
    if weight <= 0.0:
        raise ContractViolationException(f"Sampled outcome {outcome} has zero weight")

    values = _outcome_of_index(state.qubit_count, qubits)
    collapsed = np.where(values == outcome, state.amplitudes, 0.0) / np.sqrt(weight)
    drift = abs(float(np.vdot(collapsed, collapsed).real) - 1.0)
    if drift > settings.NORM_TOLERANCE * 10:
        raise ContractViolationException(f"Collapsed state norm drifted by {drift:.3e}")
    return MeasurementRecord(outcome, weight, StateVector(state.qubit_count, collapsed))


def sample_counts(state: StateVector, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram of ``shots`` repeated measurements of identical copies of ``state``"""
    probabilities = outcome_probabilities(state, qubits)
    probabilities = probabilities / probabilities.sum()
    return rng.multinomial(shots, probabilities)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, clipped to [0, 1]"""
    if a.qubit_count != b.qubit_count:
        raise ContractViolationException(
            f"Cannot compare a {a.qubit_count}-qubit state with a {b.qubit_count}-qubit state"
        )
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))
