"""
Binary-expansion decomposition of a general likelihood into two-valued stages.

The table is rescaled to L(h) = P(d|h) / min_support P(d|h) >= 1 (posteriors do
not change under constant rescaling), and log2 L(h) is expanded in binary.
Bit weight k contributes a factor 2**(2**-k) to every hypothesis whose bit is
set; k <= 0 are the integer bits, k >= 1 the fractional bits truncated at K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from models.distributions import HypothesisSpace
from models.likelihood import LikelihoodModel, TableLikelihood
from shared.utils.exceptions import ConfigException, DomainException

# Values this close to a dyadic grid point are snapped onto it
_SNAP = 1e-12


@dataclass(frozen=True)
class DecompositionStage:
    """
    One two-valued factor: hypotheses in ``favored`` are boosted by ``suppression``.

    ``bit_weight`` is None for the leading elimination stage, whose suppression is
    infinite (hypotheses outside ``favored`` are rejected).
    """

    bit_weight: Optional[int]
    favored: frozenset
    suppression: float

    @property
    def is_elimination(self) -> bool:
        return self.bit_weight is None

    def factor(self, h: int) -> float:
        if self.is_elimination:
            return 1.0 if h in self.favored else 0.0
        return self.suppression if h in self.favored else 1.0


def _snap(value: float) -> float:
    nearest = round(value)
    return float(nearest) if abs(value - nearest) < _SNAP else value


def _table_of(likelihood) -> np.ndarray:
    if isinstance(likelihood, TableLikelihood):
        return likelihood.table
    if isinstance(likelihood, LikelihoodModel):
        raise ConfigException(f"decompose_general_model expects a likelihood table, got {likelihood.kind}")
    return np.asarray(likelihood, dtype=float).reshape(-1)


def decompose_general_model(
    likelihood: TableLikelihood | Sequence[float],
    support: Iterable[int],
    K: int,
    allow_elimination: bool = False,
) -> list[DecompositionStage]:
    """
    Stages whose product reproduces L(h) on ``support`` up to a factor 2**(2**-K).

    Stages with an empty or full favored set are omitted. Zero likelihood inside
    the support raises DomainException unless ``allow_elimination`` is set, in
    which case one leading elimination stage drops those hypotheses first.
    """
    if K < 1:
        raise ConfigException(f"Fractional bit count K must be >= 1, got {K}")
    table = _table_of(likelihood)
    support = sorted(int(h) for h in support)
    if not support:
        raise ConfigException("Decomposition needs a non-empty support")
    if support[0] < 0 or support[-1] >= table.size:
        raise ConfigException(f"Support reaches outside a table of {table.size} entries")

    stages: list[DecompositionStage] = []
    zeros = [h for h in support if table[h] <= 0.0]
    if zeros:
        if not allow_elimination:
            raise DomainException(zeros[0])
        support = [h for h in support if table[h] > 0.0]
        if not support:
            raise DomainException(zeros[0])
        stages.append(DecompositionStage(None, frozenset(support), math.inf))

    floor_value = min(table[h] for h in support)
    exponents = {h: _snap(math.log2(table[h] / floor_value)) for h in support}

    integer_parts = {h: int(math.floor(x)) for h, x in exponents.items()}
    fractional_bits = {}
    for h, x in exponents.items():
        scaled = (x - integer_parts[h]) * 2 ** K
        fractional_bits[h] = int(math.floor(_snap(scaled)))

    full = frozenset(support)
    top_bit = max(integer_parts.values()).bit_length() - 1
    for j in range(top_bit, -1, -1):
        favored = frozenset(h for h in support if (integer_parts[h] >> j) & 1)
        if favored and favored != full:
            stages.append(DecompositionStage(-j, favored, 2.0 ** (2 ** j)))

    for k in range(1, K + 1):
        favored = frozenset(h for h in support if (fractional_bits[h] >> (K - k)) & 1)
        if favored and favored != full:
            stages.append(DecompositionStage(k, favored, 2.0 ** (2.0 ** -k)))

    return stages


def reconstruct_likelihood(stages: Sequence[DecompositionStage], space: HypothesisSpace) -> np.ndarray:
    """Pointwise product of the stage factors (rescaled likelihood, may exceed 1)"""
    table = np.ones(space.size)
    for stage in stages:
        if stage.is_elimination:
            mask = np.zeros(space.size, dtype=bool)
            mask[sorted(stage.favored)] = True
            table[~mask] = 0.0
        else:
            table[sorted(stage.favored)] *= stage.suppression
    return table
