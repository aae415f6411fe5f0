"""
Gate descriptors.

Every variant denotes a unitary on a register where qubit 0 is the least
significant bit of the basis index. Each variant carries its analytic inverse,
so circuits built from them are closed under inverse and control.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable

import numpy as np

from shared.utils.exceptions import ConfigException

if TYPE_CHECKING:
    from quantum_core.circuit import Circuit


class Gate:
    """Base class for gate descriptors"""

    kind: str = "gate"

    def qubits(self) -> tuple[int, ...]:
        raise NotImplementedError

    def inverse(self) -> "Gate":
        raise NotImplementedError

    def to_dict(self, name_of: Callable[["Circuit"], str]) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Hadamard(Gate):
    target: int
    kind = "hadamard"

    def qubits(self) -> tuple[int, ...]:
        return (self.target,)

    def inverse(self) -> "Hadamard":
        return self

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "target": self.target}


@dataclass(frozen=True, eq=False)
class ConditionalRotation(Gate):
    """
    Uniformly controlled Y rotation.

    The rotation angle applied to ``target`` is ``angles[v]`` where ``v`` is the
    integer read from ``condition_qubits`` (first entry least significant).
    RY(a) maps |0> to cos(a/2)|0> + sin(a/2)|1>.
    """

    target: int
    condition_qubits: tuple[int, ...]
    angles: np.ndarray
    kind = "conditional_rotation"

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if angles.size != 2 ** len(self.condition_qubits):
            raise ConfigException(
                f"Angle table has {angles.size} entries, expected {2 ** len(self.condition_qubits)}"
            )
        if self.target in self.condition_qubits:
            raise ConfigException(f"Rotation target {self.target} is also a condition qubit")
        if not np.all(np.isfinite(angles)):
            raise ConfigException("Angle table contains non-finite values")
        angles.setflags(write=False)
        object.__setattr__(self, "condition_qubits", tuple(int(c) for c in self.condition_qubits))
        object.__setattr__(self, "angles", angles)

    def qubits(self) -> tuple[int, ...]:
        return (*self.condition_qubits, self.target)

    def inverse(self) -> "ConditionalRotation":
        return ConditionalRotation(self.target, self.condition_qubits, -self.angles)

    def to_dict(self, name_of) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "condition_qubits": list(self.condition_qubits),
            "angles": [float(a) for a in self.angles],
        }


@dataclass(frozen=True, eq=False)
class PhaseOracle(Gate):
    """Multiplies every basis state |h> of the low ``width`` qubits with h in ``marked`` by e^{i phase}"""

    marked: frozenset
    phase: float
    width: int
    kind = "phase_oracle"

    def __post_init__(self):
        marked = frozenset(int(h) for h in self.marked)
        if any(h < 0 or h >= 2 ** self.width for h in marked):
            raise ConfigException(f"Marked hypotheses fall outside a {self.width}-qubit register")
        object.__setattr__(self, "marked", marked)

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.width))

    def inverse(self) -> "PhaseOracle":
        return PhaseOracle(self.marked, -self.phase, self.width)

    def to_dict(self, name_of) -> dict:
        return {
            "kind": self.kind,
            "marked": sorted(self.marked),
            "phase": float(self.phase),
            "width": self.width,
        }


@dataclass(frozen=True, eq=False)
class ZeroConditionedPhase(Gate):
    """Multiplies every |h> with h != 0 on the low ``width`` qubits by e^{i phase}; phase = pi gives Pi"""

    phase: float
    width: int
    kind = "zero_conditioned_phase"

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.width))

    def inverse(self) -> "ZeroConditionedPhase":
        return ZeroConditionedPhase(-self.phase, self.width)

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "phase": float(self.phase), "width": self.width}


@dataclass(frozen=True, eq=False)
class QFT(Gate):
    start: int
    count: int
    kind = "qft"

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.start + self.count))

    def inverse(self) -> "InverseQFT":
        return InverseQFT(self.start, self.count)

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "start": self.start, "count": self.count}


@dataclass(frozen=True, eq=False)
class InverseQFT(Gate):
    start: int
    count: int
    kind = "inverse_qft"

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.start + self.count))

    def inverse(self) -> QFT:
        return QFT(self.start, self.count)

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "start": self.start, "count": self.count}


@dataclass(frozen=True, eq=False)
class Controlled(Gate):
    control: int
    inner: Gate
    kind = "controlled"

    def __post_init__(self):
        if self.control in self.inner.qubits():
            raise ConfigException(f"Control qubit {self.control} is inside the controlled gate's range")

    def qubits(self) -> tuple[int, ...]:
        return (*self.inner.qubits(), self.control)

    def inverse(self) -> "Controlled":
        return Controlled(self.control, self.inner.inverse())

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "control": self.control, "inner": self.inner.to_dict(name_of)}


@dataclass(frozen=True, eq=False)
class Composite(Gate):
    """A whole circuit used as one gate on the low ``circuit.register_width`` qubits"""

    circuit: "Circuit"
    adjoint: bool = False
    kind = "composite"

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.circuit.register_width))

    def inverse(self) -> "Composite":
        return Composite(self.circuit, not self.adjoint)

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "circuit": name_of(self.circuit), "adjoint": self.adjoint}


@dataclass(frozen=True, eq=False)
class UnitaryGate(Gate):
    """Dense unitary on the low ``width`` qubits"""

    matrix: np.ndarray
    width: int
    label: str = field(default="unitary")
    kind = "unitary"

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2 ** self.width, 2 ** self.width):
            raise ConfigException(f"Matrix shape {matrix.shape} does not fit {self.width} qubits")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.width))

    def inverse(self) -> "UnitaryGate":
        return UnitaryGate(self.matrix.conj().T, self.width, f"{self.label}^-1")

    def to_dict(self, name_of) -> dict:
        return {"kind": self.kind, "label": self.label, "width": self.width}


def conditional_ancilla_rotation(angles: Iterable[float], register_width: int, ancilla: int | None = None) -> ConditionalRotation:
    """Rotation of one ancilla conditioned on the full register value h"""
    target = register_width if ancilla is None else ancilla
    return ConditionalRotation(target, tuple(range(register_width)), np.asarray(list(angles), dtype=float))


def hadamard_layer(qubits: Iterable[int]) -> tuple[Hadamard, ...]:
    return tuple(Hadamard(q) for q in qubits)
