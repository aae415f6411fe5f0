"""
Table-driven amplitude encoding of a prior.

Binary tree of uniformly controlled Y rotations: the most significant qubit
is rotated first, and each lower qubit is rotated conditioned on the value of
every qubit above it. The gate count grows exponentially in n; efficient
preparation is out of scope, so correctness is all that is asked of it.
"""
from __future__ import annotations

import numpy as np

from models.distributions import PriorDistribution
from quantum_core.circuit import Circuit, apply_circuit
from quantum_core.gates import ConditionalRotation
from quantum_core.state import StateVector


def tree_angles(p: np.ndarray, n: int, level: int) -> np.ndarray:
    """Angles for qubit n-1-level, indexed by the value of the ``level`` qubits above it"""
    blocks = p.reshape(2 ** level, 2, 2 ** (n - level - 1))
    lower = blocks[:, 0, :].sum(axis=1)
    upper = blocks[:, 1, :].sum(axis=1)
    return 2.0 * np.arctan2(np.sqrt(upper), np.sqrt(lower))


def prepare_prior_circuit(prior: PriorDistribution) -> Circuit:
    """Circuit U with U|0> = sum_h sqrt(P(h)) |h>"""
    n = prior.space.n
    gates = []
    for level in range(n):
        target = n - 1 - level
        condition = tuple(range(target + 1, n))
        gates.append(ConditionalRotation(target, condition, tree_angles(prior.p, n, level)))
    return Circuit(tuple(gates), n, label="prior")


def prior_state(prior: PriorDistribution) -> StateVector:
    return apply_circuit(StateVector.zero(prior.space.n), prepare_prior_circuit(prior))


def amplitude_state(p: np.ndarray) -> StateVector:
    """Exact amplitude encoding sqrt(p) of a normalized table, without a circuit"""
    return StateVector.from_amplitudes(np.sqrt(np.asarray(p, dtype=float)), normalize=True)
