from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from shared.config.settings import settings
from shared.utils.exceptions import ConfigException


@dataclass(frozen=True)
class HypothesisSpace:
    """Hypotheses {0, ..., 2**n - 1}, identified with computational basis states of n qubits"""

    n: int

    def __post_init__(self):
        if self.n < 1 or self.n > settings.MAX_QUBITS:
            raise ConfigException(f"Hypothesis space needs 1..{settings.MAX_QUBITS} qubits, got n={self.n}")

    @property
    def size(self) -> int:
        return 2 ** self.n

    def validate_subset(self, hypotheses: Iterable[int], name: str = "hypothesis set") -> frozenset:
        subset = frozenset(int(h) for h in hypotheses)
        outside = sorted(h for h in subset if h < 0 or h >= self.size)
        if outside:
            raise ConfigException(f"{name} contains h={outside[0]} outside 0..{self.size - 1}")
        return subset

    @classmethod
    def for_size(cls, size: int) -> "HypothesisSpace":
        n = int(round(np.log2(size))) if size > 0 else 0
        if size < 2 or 2 ** n != size:
            raise ConfigException(f"Table length {size} is not a power of two >= 2")
        return cls(n)


@dataclass(frozen=True, eq=False)
class PriorDistribution:
    space: HypothesisSpace
    p: np.ndarray
    support: frozenset = field(init=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.size != self.space.size:
            raise ConfigException(f"Prior has {p.size} entries, expected {self.space.size}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ConfigException("Prior entries must be finite and non-negative")
        if abs(float(p.sum()) - 1.0) > settings.PROBABILITY_TOLERANCE:
            raise ConfigException(f"prior not normalized (sum = {float(p.sum()):.15g})")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "support", frozenset(int(h) for h in np.flatnonzero(p > 0)))

    @classmethod
    def from_weights(cls, weights, space: HypothesisSpace | None = None) -> "PriorDistribution":
        weights = np.asarray(weights, dtype=float).reshape(-1)
        total = float(weights.sum())
        if total <= 0:
            raise ConfigException("Prior weights must have a positive sum")
        space = space or HypothesisSpace.for_size(weights.size)
        return cls(space, weights / total)

    @classmethod
    def uniform(cls, space: HypothesisSpace) -> "PriorDistribution":
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point(cls, space: HypothesisSpace, h: int) -> "PriorDistribution":
        space.validate_subset([h], "point prior")
        p = np.zeros(space.size)
        p[h] = 1.0
        return cls(space, p)

    @classmethod
    def geometric(cls, space: HypothesisSpace, ratio: float) -> "PriorDistribution":
        if ratio <= 0:
            raise ConfigException(f"Geometric ratio must be positive, got {ratio}")
        return cls.from_weights(ratio ** np.arange(space.size, dtype=float), space)

    @classmethod
    def random(cls, space: HypothesisSpace, seed: int) -> "PriorDistribution":
        rng = np.random.default_rng(seed)
        return cls.from_weights(rng.dirichlet(np.ones(space.size)), space)

    def mass(self, hypotheses: Iterable[int]) -> float:
        """Total prior probability of a set of hypotheses"""
        idx = np.fromiter((int(h) for h in hypotheses), dtype=np.int64)
        return float(self.p[idx].sum()) if idx.size else 0.0

    def amplitudes(self) -> np.ndarray:
        """Real non-negative amplitudes sqrt(P(h))"""
        return np.sqrt(self.p)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def bhattacharyya(p: np.ndarray, q: np.ndarray) -> float:
    """Overlap sum sqrt(p q): fidelity of the two amplitude-encoded states"""
    return float(np.sqrt(np.asarray(p, dtype=float) * np.asarray(q, dtype=float)).sum())
