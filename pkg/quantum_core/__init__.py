# Exact statevector simulation
from quantum_core.state import StateVector
from quantum_core.gates import (
    Composite,
    ConditionalRotation,
    Controlled,
    Gate,
    Hadamard,
    InverseQFT,
    PhaseOracle,
    QFT,
    UnitaryGate,
    ZeroConditionedPhase,
    conditional_ancilla_rotation,
    hadamard_layer,
)
from quantum_core.circuit import Circuit, apply_circuit, circuit_transform, identity, serialize_circuit
from quantum_core.measurement import (
    MeasurementRecord,
    branch_probabilities,
    fidelity,
    measure,
    outcome_probabilities,
    sample_counts,
)
from quantum_core.preparation import amplitude_state, prepare_prior_circuit, prior_state

__all__ = [
    "StateVector",
    "Gate",
    "Hadamard",
    "ConditionalRotation",
    "PhaseOracle",
    "ZeroConditionedPhase",
    "QFT",
    "InverseQFT",
    "Controlled",
    "Composite",
    "UnitaryGate",
    "conditional_ancilla_rotation",
    "hadamard_layer",
    "Circuit",
    "apply_circuit",
    "circuit_transform",
    "identity",
    "serialize_circuit",
    "MeasurementRecord",
    "branch_probabilities",
    "fidelity",
    "measure",
    "outcome_probabilities",
    "sample_counts",
    "amplitude_state",
    "prepare_prior_circuit",
    "prior_state",
]
