from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, ContractViolationException


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Unit-norm amplitudes over 2**qubit_count basis states.

    Index h encodes qubit 0 as its least significant bit; ancillas are placed on
    the highest qubits. The amplitude array is read-only.
    """

    qubit_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.qubit_count < 1 or self.qubit_count > settings.MAX_QUBITS:
            raise ConfigException(f"Qubit count {self.qubit_count} outside 1..{settings.MAX_QUBITS}")
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.size != 2 ** self.qubit_count:
            raise ConfigException(
                f"Expected {2 ** self.qubit_count} amplitudes for {self.qubit_count} qubits, got {amplitudes.size}"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise ContractViolationException("State contains non-finite amplitudes")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def zero(cls, qubit_count: int) -> "StateVector":
        return cls.basis(qubit_count, 0)

    @classmethod
    def basis(cls, qubit_count: int, index: int) -> "StateVector":
        if index < 0 or index >= 2 ** qubit_count:
            raise ConfigException(f"Basis index {index} outside a {qubit_count}-qubit register")
        amplitudes = np.zeros(2 ** qubit_count, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(qubit_count, amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        qubit_count = int(round(np.log2(amplitudes.size))) if amplitudes.size else 0
        norm = float(np.linalg.norm(amplitudes))
        if normalize:
            if norm == 0.0:
                raise ContractViolationException("Cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        elif abs(norm ** 2 - 1.0) > settings.NORM_TOLERANCE * 10:
            raise ContractViolationException(f"Amplitudes have squared norm {norm ** 2:.15f}, expected 1")
        return cls(qubit_count, amplitudes)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor_ancillas(self, count: int) -> "StateVector":
        """This state with ``count`` fresh |0> qubits placed above it"""
        amplitudes = np.zeros(2 ** (self.qubit_count + count), dtype=np.complex128)
        amplitudes[: self.dimension] = self.amplitudes
        return StateVector(self.qubit_count + count, amplitudes)

    def register_block(self, width: int, high_value: int) -> np.ndarray:
        """Unnormalized amplitudes of the low ``width`` qubits given the high qubits read ``high_value``"""
        block = 2 ** width
        return self.amplitudes[high_value * block:(high_value + 1) * block].copy()
