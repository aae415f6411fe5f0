"""
Statevector kernels.

Arrays have shape ``(2**q, *batch)``: axis 0 is the basis index (qubit 0 least
significant), trailing axes are independent columns, which lets the same
kernels build dense circuit matrices from an identity batch. Kernels update
the array in place. ``ctrl_mask`` restricts a gate to basis states whose
control bits are all 1.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

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
)
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException

_SQRT2_INV = 1.0 / np.sqrt(2.0)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=None)
def _basis(q: int) -> np.ndarray:
    return _frozen(np.arange(2 ** q, dtype=np.int64))


@lru_cache(maxsize=4096)
def _controlled_rows(q: int, ctrl_mask: int) -> np.ndarray:
    idx = _basis(q)
    return _frozen(idx[(idx & ctrl_mask) == ctrl_mask])


@lru_cache(maxsize=4096)
def _pair_rows(q: int, target: int, ctrl_mask: int) -> tuple[np.ndarray, np.ndarray]:
    idx = _basis(q)
    bit = 1 << target
    lower = idx[((idx & bit) == 0) & ((idx & ctrl_mask) == ctrl_mask)]
    return _frozen(lower), _frozen(lower | bit)


@lru_cache(maxsize=4096)
def _condition_values(q: int, target: int, ctrl_mask: int, condition_qubits: tuple[int, ...]) -> np.ndarray:
    lower, _ = _pair_rows(q, target, ctrl_mask)
    values = np.zeros(lower.shape, dtype=np.int64)
    for j, c in enumerate(condition_qubits):
        values |= ((lower >> c) & 1) << j
    return _frozen(values)


@lru_cache(maxsize=4096)
def _marked_rows(q: int, width: int, marked: frozenset, ctrl_mask: int) -> np.ndarray:
    idx = _controlled_rows(q, ctrl_mask)
    low = idx & ((1 << width) - 1)
    return _frozen(idx[np.isin(low, np.fromiter(marked, dtype=np.int64, count=len(marked)))])


@lru_cache(maxsize=4096)
def _nonzero_rows(q: int, width: int, ctrl_mask: int) -> np.ndarray:
    idx = _controlled_rows(q, ctrl_mask)
    return _frozen(idx[(idx & ((1 << width) - 1)) != 0])


def _column(values: np.ndarray, arr: np.ndarray) -> np.ndarray:
    return values.reshape(values.shape + (1,) * (arr.ndim - 1))


def _assign_controlled(arr: np.ndarray, transformed: np.ndarray, q: int, ctrl_mask: int) -> None:
    if ctrl_mask == 0:
        arr[...] = transformed
    else:
        rows = _controlled_rows(q, ctrl_mask)
        arr[rows] = transformed[rows]


def _apply_hadamard(arr, gate: Hadamard, q, ctrl_mask):
    i0, i1 = _pair_rows(q, gate.target, ctrl_mask)
    a, b = arr[i0], arr[i1]
    arr[i0] = (a + b) * _SQRT2_INV
    arr[i1] = (a - b) * _SQRT2_INV


def _apply_conditional_rotation(arr, gate: ConditionalRotation, q, ctrl_mask):
    i0, i1 = _pair_rows(q, gate.target, ctrl_mask)
    half = gate.angles[_condition_values(q, gate.target, ctrl_mask, gate.condition_qubits)] / 2.0
    c, s = _column(np.cos(half), arr), _column(np.sin(half), arr)
    a, b = arr[i0], arr[i1]
    arr[i0] = c * a - s * b
    arr[i1] = s * a + c * b


def _apply_phase_oracle(arr, gate: PhaseOracle, q, ctrl_mask):
    if gate.marked:
        arr[_marked_rows(q, gate.width, gate.marked, ctrl_mask)] *= np.exp(1j * gate.phase)


def _apply_zero_conditioned_phase(arr, gate: ZeroConditionedPhase, q, ctrl_mask):
    arr[_nonzero_rows(q, gate.width, ctrl_mask)] *= np.exp(1j * gate.phase)


def _apply_fourier(arr, gate, q, ctrl_mask, inverse: bool):
    outer = 2 ** (q - gate.start - gate.count)
    view = arr.reshape((outer, 2 ** gate.count, 2 ** gate.start) + arr.shape[1:])
    # QFT|j> = 2^{-t/2} sum_k e^{+2 pi i jk / 2^t}|k>, i.e. numpy's orthonormal ifft
    transformed = np.fft.fft(view, axis=1, norm="ortho") if inverse else np.fft.ifft(view, axis=1, norm="ortho")
    _assign_controlled(arr, transformed.reshape(arr.shape), q, ctrl_mask)


def _apply_dense(arr, matrix: np.ndarray, width: int, q, ctrl_mask):
    view = arr.reshape((2 ** (q - width), 2 ** width) + arr.shape[1:])
    transformed = np.einsum("ij,hj...->hi...", matrix, view)
    _assign_controlled(arr, transformed.reshape(arr.shape), q, ctrl_mask)


def _apply_composite(arr, gate: Composite, q, ctrl_mask):
    circuit = gate.circuit
    if circuit.register_width <= settings.DENSE_COMPOSITE_MAX_QUBITS:
        matrix = circuit.adjoint_unitary if gate.adjoint else circuit.unitary
        _apply_dense(arr, matrix, circuit.register_width, q, ctrl_mask)
    else:
        body = circuit.inverse() if gate.adjoint else circuit
        apply_gates(arr, body.gates, q, ctrl_mask)


def apply_gate(arr: np.ndarray, gate: Gate, q: int, ctrl_mask: int = 0) -> None:
    """Apply one gate in place"""
    if isinstance(gate, Hadamard):
        _apply_hadamard(arr, gate, q, ctrl_mask)
    elif isinstance(gate, ConditionalRotation):
        _apply_conditional_rotation(arr, gate, q, ctrl_mask)
    elif isinstance(gate, PhaseOracle):
        _apply_phase_oracle(arr, gate, q, ctrl_mask)
    elif isinstance(gate, ZeroConditionedPhase):
        _apply_zero_conditioned_phase(arr, gate, q, ctrl_mask)
    elif isinstance(gate, QFT):
        _apply_fourier(arr, gate, q, ctrl_mask, inverse=False)
    elif isinstance(gate, InverseQFT):
        _apply_fourier(arr, gate, q, ctrl_mask, inverse=True)
    elif isinstance(gate, Controlled):
        apply_gate(arr, gate.inner, q, ctrl_mask | (1 << gate.control))
    elif isinstance(gate, Composite):
        _apply_composite(arr, gate, q, ctrl_mask)
    elif isinstance(gate, UnitaryGate):
        _apply_dense(arr, gate.matrix, gate.width, q, ctrl_mask)
    else:
        raise ConfigException(f"Unsupported gate {type(gate).__name__}")


def apply_gates(arr: np.ndarray, gates, q: int, ctrl_mask: int = 0) -> np.ndarray:
    """Apply a gate sequence in place and return the array"""
    for gate in gates:
        apply_gate(arr, gate, q, ctrl_mask)
    return arr
