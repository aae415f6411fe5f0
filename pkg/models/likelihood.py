"""Likelihood models P(d|h) for one fixed observed datum d."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from models.distributions import HypothesisSpace
from shared.utils.exceptions import ConfigException


class LikelihoodModel:
    """Base class; every variant has a Table view over a hypothesis space"""

    kind: str = "likelihood"

    def values(self, space: HypothesisSpace) -> np.ndarray:
        raise NotImplementedError

    @property
    def favored(self) -> Optional[frozenset]:
        """Favored set H_d of two-valued variants; None for general tables"""
        return None

    @property
    def suppression(self) -> Optional[float]:
        return None


@dataclass(frozen=True, eq=False)
class TableLikelihood(LikelihoodModel):
    table: np.ndarray
    kind = "table"

    def __post_init__(self):
        table = np.array(self.table, dtype=float).reshape(-1)
        if not np.all(np.isfinite(table)) or np.any(table < 0) or np.any(table > 1):
            raise ConfigException("Likelihood table values must lie in [0, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def values(self, space: HypothesisSpace) -> np.ndarray:
        if self.table.size != space.size:
            raise ConfigException(f"Likelihood table has {self.table.size} entries, expected {space.size}")
        return self.table


@dataclass(frozen=True, eq=False)
class TwoValuedLikelihood(LikelihoodModel):
    """P(d|h) = a1 on the favored set, a2 elsewhere, with a1 > a2 > 0"""

    favored_set: frozenset
    a1: float
    a2: float
    kind = "two_valued"

    def __post_init__(self):
        object.__setattr__(self, "favored_set", frozenset(int(h) for h in self.favored_set))
        if not (1.0 >= self.a1 > self.a2 > 0.0):
            raise ConfigException(f"Two-valued model needs 1 >= a1 > a2 > 0, got a1={self.a1}, a2={self.a2}")

    @classmethod
    def from_suppression(cls, favored: Iterable[int], r: float) -> "TwoValuedLikelihood":
        if not r > 1.0:
            raise ConfigException(f"Suppression coefficient must exceed 1, got r={r}")
        return cls(frozenset(favored), 1.0, 1.0 / r)

    @property
    def favored(self) -> frozenset:
        return self.favored_set

    @property
    def suppression(self) -> float:
        return self.a1 / self.a2

    def values(self, space: HypothesisSpace) -> np.ndarray:
        space.validate_subset(self.favored_set, "favored set")
        table = np.full(space.size, self.a2)
        table[sorted(self.favored_set)] = self.a1
        return table


@dataclass(frozen=True, eq=False)
class EliminationLikelihood(LikelihoodModel):
    """P(d|h) = 1/|H_d| for consistent hypotheses, 0 for rejected ones"""

    consistent: frozenset
    kind = "elimination"

    def __post_init__(self):
        consistent = frozenset(int(h) for h in self.consistent)
        if not consistent:
            raise ConfigException("Elimination model needs at least one consistent hypothesis")
        object.__setattr__(self, "consistent", consistent)

    @property
    def favored(self) -> frozenset:
        return self.consistent

    @property
    def suppression(self) -> float:
        return float("inf")

    def values(self, space: HypothesisSpace) -> np.ndarray:
        space.validate_subset(self.consistent, "consistent set")
        table = np.zeros(space.size)
        table[sorted(self.consistent)] = 1.0 / len(self.consistent)
        return table

    def indicator(self, space: HypothesisSpace) -> np.ndarray:
        space.validate_subset(self.consistent, "consistent set")
        table = np.zeros(space.size)
        table[sorted(self.consistent)] = 1.0
        return table
