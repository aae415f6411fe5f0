from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from models.distributions import HypothesisSpace
from models.likelihood import LikelihoodModel, TableLikelihood
from quantum_core.circuit import Circuit
from quantum_core.gates import conditional_ancilla_rotation
from shared.config.settings import settings
from shared.utils.exceptions import ConfigException, InvalidRotationException


def _space_for(likelihood: LikelihoodModel, space: Optional[HypothesisSpace]) -> HypothesisSpace:
    if space is not None:
        return space
    if isinstance(likelihood, TableLikelihood):
        return HypothesisSpace.for_size(likelihood.table.size)
    raise ConfigException(f"A hypothesis space is required for a {likelihood.kind} likelihood")


def rotation_amplitudes(
    likelihood_values: np.ndarray,
    c_squared: float,
    residual_profile: Optional[np.ndarray],
    support: Iterable[int],
) -> np.ndarray:
    """
    A_k(h) = c sqrt(P(d|h)) / B_{k-1}(h), with B_0 = 1.

    Amplitudes above 1 are an error on the support and are clamped to 1 off it.
    """
    if c_squared < 0:
        raise ConfigException(f"c^2 must be non-negative, got {c_squared}")
    numerator = c_squared * likelihood_values
    denominator = np.ones_like(likelihood_values) if residual_profile is None else np.asarray(residual_profile, dtype=float) ** 2

    safe = np.where(denominator > 0, denominator, 1.0)
    # 0/0 (exhausted residual, zero likelihood) is a zero rotation
    squared = np.where(numerator > 0, np.where(denominator > 0, numerator / safe, np.inf), 0.0)

    for h in sorted(support):
        if squared[h] > 1.0 + settings.PROBABILITY_TOLERANCE:
            raise InvalidRotationException(h, float(np.sqrt(squared[h])))
    return np.sqrt(np.minimum(squared, 1.0))


def build_update_rotation(
    likelihood: LikelihoodModel,
    c_squared: float,
    residual_profile: Optional[np.ndarray] = None,
    space: Optional[HypothesisSpace] = None,
    support: Optional[Iterable[int]] = None,
) -> Circuit:
    """
    Conditional ancilla rotation on register (n qubits) plus one ancilla (qubit n).

    Without a residual profile the ancilla starts in |0> and is mapped to
    A_1|0> + B_1|1>. With the profile B_{k-1} of a failed stage the ancilla starts
    in |1> and is mapped to A_k|0> + (B_k/B_{k-1})|1>. In both cases the |0>
    amplitude at h is A_k(h).
    """
    space = _space_for(likelihood, space)
    support = range(space.size) if support is None else support
    amplitudes = rotation_amplitudes(likelihood.values(space), c_squared, residual_profile, support)

    if residual_profile is None:
        angles = 2.0 * np.arccos(amplitudes)
    else:
        angles = -2.0 * np.arcsin(amplitudes)
    return Circuit((conditional_ancilla_rotation(angles, space.n),), space.n + 1, label="U_d")
