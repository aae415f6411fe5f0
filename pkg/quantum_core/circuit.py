from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from quantum_core.gates import Composite, Controlled, Gate
from quantum_core.kernels import apply_gates
from quantum_core.state import StateVector
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, ContractViolationException
from shared.utils.logger import get_logger

logger = get_logger("quantum_core", settings.LOG_LEVEL)


@dataclass(frozen=True, eq=False)
class Circuit:
    """
    Ordered gate sequence on ``register_width`` qubits.

    Gates are listed in application order. Circuits are immutable; derived
    circuits (inverse, powers, controlled forms) wrap this one as a Composite
    gate instead of copying its gates, and the dense matrix and inverse are
    cached per object.
    """

    gates: tuple[Gate, ...]
    register_width: int
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.register_width < 1 or self.register_width > settings.MAX_QUBITS:
            raise ConfigException(
                f"Register width {self.register_width} outside 1..{settings.MAX_QUBITS}"
            )
        for gate in self.gates:
            touched = gate.qubits()
            if touched and (min(touched) < 0 or max(touched) >= self.register_width):
                raise ConfigException(
                    f"Gate {gate.kind} touches qubits {touched} outside a {self.register_width}-qubit circuit"
                )

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def operation_count(self) -> int:
        """Primitive gates applied, counting through nested composites and controls"""
        if "operation_count" not in self._cache:
            self._cache["operation_count"] = sum(_operation_count(g) for g in self.gates)
        return self._cache["operation_count"]

    @property
    def unitary(self) -> np.ndarray:
        """Dense matrix of the circuit; column j is the image of |j>"""
        if "unitary" not in self._cache:
            dim = 2 ** self.register_width
            matrix = apply_gates(np.eye(dim, dtype=complex), self.gates, self.register_width)
            matrix.setflags(write=False)
            self._cache["unitary"] = matrix
        return self._cache["unitary"]

    @property
    def adjoint_unitary(self) -> np.ndarray:
        if "adjoint_unitary" not in self._cache:
            matrix = np.ascontiguousarray(self.unitary.conj().T)
            matrix.setflags(write=False)
            self._cache["adjoint_unitary"] = matrix
        return self._cache["adjoint_unitary"]

    def inverse(self) -> "Circuit":
        """Reversed sequence of gate inverses"""
        if "inverse" not in self._cache:
            inverse = Circuit(
                tuple(g.inverse() for g in reversed(self.gates)),
                self.register_width,
                label=f"{self.label}^-1" if self.label else "",
            )
            inverse._cache["inverse"] = self
            self._cache["inverse"] = inverse
        return self._cache["inverse"]

    def widened(self, width: int) -> "Circuit":
        if width == self.register_width:
            return self
        if width < self.register_width:
            raise ConfigException(f"Cannot narrow a {self.register_width}-qubit circuit to {width} qubits")
        return Circuit(self.gates, width, label=self.label)

    def controlled(self, control: int, width: Optional[int] = None) -> "Circuit":
        if control < self.register_width:
            raise ConfigException(
                f"Control qubit {control} lies inside the circuit's target range 0..{self.register_width - 1}"
            )
        total = control + 1 if width is None else width
        return Circuit((Controlled(control, Composite(self)),), total, label=f"c{control}-{self.label}")

    def power(self, k: int) -> "Circuit":
        if k < 0:
            raise ConfigException(f"Circuit power must be non-negative, got {k}")
        return Circuit((Composite(self),) * k, self.register_width, label=f"{self.label}^{k}")

    def compose(self, other: "Circuit") -> "Circuit":
        """Circuit applying ``self`` first and ``other`` afterwards"""
        width = max(self.register_width, other.register_width)
        return Circuit(self.gates + other.gates, width)


def _operation_count(gate: Gate) -> int:
    if isinstance(gate, Controlled):
        return _operation_count(gate.inner)
    if isinstance(gate, Composite):
        return max(1, gate.circuit.operation_count)
    return 1


def identity(width: int) -> Circuit:
    return Circuit((), width, label="identity")


def circuit_transform(
    circuit: Circuit,
    kind: str,
    *,
    control: Optional[int] = None,
    k: Optional[int] = None,
    other: Optional[Circuit] = None,
    width: Optional[int] = None,
) -> Circuit:
    """Dispatch for inverse | controlled | power | compose"""
    if kind == "inverse":
        return circuit.inverse()
    if kind == "controlled":
        if control is None:
            raise ConfigException("controlled transform needs a control qubit")
        return circuit.controlled(control, width)
    if kind == "power":
        if k is None:
            raise ConfigException("power transform needs an exponent")
        return circuit.power(k)
    if kind == "compose":
        if other is None:
            raise ConfigException("compose transform needs a second circuit")
        return circuit.compose(other)
    raise ConfigException(f"Unknown circuit transform '{kind}'")


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Unitary image of ``state``; the norm is checked against NORM_TOLERANCE"""
    if circuit.register_width != state.qubit_count:
        raise ContractViolationException(
            f"Circuit width {circuit.register_width} does not match state width {state.qubit_count}"
        )
    amplitudes = apply_gates(state.amplitudes.copy(), circuit.gates, state.qubit_count)
    if not np.all(np.isfinite(amplitudes)):
        raise ContractViolationException("Non-finite amplitude after circuit application")
    drift = abs(float(np.vdot(amplitudes, amplitudes).real) - 1.0)
    operations = max(1, circuit.operation_count)
    if drift > settings.NORM_TOLERANCE * operations:
        logger.error(f"Norm drift {drift:.3e} after {operations} operations")
        raise ContractViolationException(f"Norm drifted by {drift:.3e} during circuit application")
    return StateVector(state.qubit_count, amplitudes)


def serialize_circuit(circuit: Circuit) -> dict:
    """JSON-ready gate list; shared sub-circuits appear once in ``circuits``"""
    names: dict[int, str] = {}
    tables: dict[str, dict] = {}

    def name_of(sub: Circuit) -> str:
        key = id(sub)
        if key not in names:
            names[key] = f"c{len(names)}"
            tables[names[key]] = {}
            tables[names[key]] = _describe(sub)
        return names[key]

    def _describe(sub: Circuit) -> dict:
        return {
            "label": sub.label,
            "register_width": sub.register_width,
            "gates": [g.to_dict(name_of) for g in sub.gates],
        }

    top = _describe(circuit)
    top["circuits"] = tables
    return top
