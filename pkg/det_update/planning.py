"""
Iteration planning for elimination and two-valued updates.

Within span{|alpha>, |beta>} the prior sits at angle theta/2 from |beta> and
the posterior at theta'/2; every application of A advances the angle by theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.optimize import minimize

from shared.config.settings import settings
from shared.utils.exceptions import ConfigException
from shared.utils.logger import get_logger
from shared.utils.retry import retry_with_restarts

logger = get_logger("det_update", settings.LOG_LEVEL)

PlanMode = Literal["closest_integer", "fractional_final", "fractional_power"]
PLAN_MODES = ("closest_integer", "fractional_final", "fractional_power")

INTEGER_SNAP = 1e-12


@dataclass(frozen=True)
class IterationPlan:
    theta: float
    suppression: float
    theta_prime: float
    T: float
    mode: PlanMode = "fractional_final"

    @property
    def whole_iterations(self) -> int:
        """floor(T), with T within INTEGER_SNAP of an integer snapped to it"""
        nearest = round(self.T)
        if abs(self.T - nearest) <= INTEGER_SNAP:
            return int(nearest)
        return int(math.floor(self.T))

    @property
    def remainder(self) -> float:
        return max(0.0, self.T - self.whole_iterations)

    @property
    def rounded_iterations(self) -> int:
        """Closest integer to T, halves rounded up"""
        return int(math.floor(self.T + 0.5))


def posterior_angle(theta: float, r: float) -> float:
    """theta' with cos(theta'/2) = cos(theta/2) / sqrt(r sin^2(theta/2) + cos^2(theta/2))"""
    if math.isinf(r):
        return math.pi
    s2 = math.sin(theta / 2) ** 2
    c = math.cos(theta / 2)
    cosine = c / math.sqrt(r * s2 + c * c)
    return 2.0 * math.acos(min(1.0, max(-1.0, cosine)))


def iteration_plan(theta: float, r: float, mode: PlanMode = "fractional_final") -> IterationPlan:
    if not (0.0 < theta <= math.pi + settings.NORM_TOLERANCE):
        raise ConfigException(f"theta must lie in (0, pi], got {theta}")
    if not (r >= 1.0):
        raise ConfigException(f"Suppression r must be >= 1, got {r}")
    if mode not in PLAN_MODES:
        raise ConfigException(f"Unknown iteration mode '{mode}'")
    theta = min(theta, math.pi)

    if math.isinf(r):
        theta_prime = math.pi
        T = (math.pi / theta - 1.0) / 2.0
    else:
        theta_prime = posterior_angle(theta, r)
        T = (theta_prime / theta - 1.0) / 2.0
    return IterationPlan(theta, r, theta_prime, max(0.0, T), mode)


def predicted_fidelity(plan: IterationPlan, iterations: float) -> float:
    """|cos((2T+1)theta/2 - theta'/2)| for T applications of A"""
    return abs(math.cos((2.0 * iterations + 1.0) * plan.theta / 2.0 - plan.theta_prime / 2.0))


def fidelity_bound(estimate, delta: Optional[float] = None) -> float:
    """1 - (pi delta / (2 theta_est))^2 for an elimination update planned with theta_est"""
    delta = estimate.delta if delta is None else delta
    return 1.0 - (math.pi * delta / (2.0 * estimate.theta)) ** 2


class FractionalSolveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FractionalPhases:
    marked_phase: float
    zero_phase: float
    overlap: float


def plane_operator(theta: float, marked_phase: float, zero_phase: float) -> np.ndarray:
    """A(phi, chi) restricted to span{|alpha>, |beta>}, basis order (alpha, beta)"""
    psi = np.array([math.sin(theta / 2), math.cos(theta / 2)], dtype=complex)
    oracle = np.diag([np.exp(1j * marked_phase), 1.0])
    reflection = np.exp(1j * zero_phase) * np.eye(2) + (1.0 - np.exp(1j * zero_phase)) * np.outer(psi, psi.conj())
    return reflection @ oracle


def _plane_vector(angle: float) -> np.ndarray:
    return np.array([math.sin(angle), math.cos(angle)], dtype=complex)


def _starting_points(theta: float, start_angle: float, target_angle: float) -> list[tuple[float, float]]:
    share = min(1.0, max(0.0, (target_angle - start_angle) / theta))
    guess = math.pi * share
    return [
        (guess, guess),
        (math.pi, math.pi),
        (math.pi / 2, math.pi / 2),
        (math.pi / 2, -math.pi / 2),
        (-math.pi / 2, math.pi / 2),
        (2 * math.pi / 3, math.pi / 3),
        (math.pi / 3, 2 * math.pi / 3),
        (-guess, guess),
    ]


@retry_with_restarts(max_attempts=settings.SOLVER_MAX_ATTEMPTS, exceptions=(FractionalSolveError,))
def solve_fractional_phases(theta: float, start_angle: float, target_angle: float, attempt: int = 0) -> FractionalPhases:
    """
    Phases (phi, chi) such that A(phi, chi) maps the plane vector at
    ``start_angle`` onto the one at ``target_angle`` up to a global phase.
    """
    start = _plane_vector(start_angle)
    target = _plane_vector(target_angle)

    def infidelity(x: np.ndarray) -> float:
        image = plane_operator(theta, x[0], x[1]) @ start
        return 1.0 - abs(np.vdot(target, image))

    points = _starting_points(theta, start_angle, target_angle)
    x0 = np.array(points[attempt % len(points)], dtype=float)
    result = minimize(
        infidelity,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 8000, "maxfev": 16000},
    )
    overlap = 1.0 - float(infidelity(result.x))
    if 1.0 - overlap > settings.FRACTIONAL_FIDELITY_TARGET:
        raise FractionalSolveError(
            f"Phase search from {tuple(x0)} stopped at overlap {overlap:.15f}"
        )
    marked, zero = (float(math.remainder(v, 2 * math.pi)) for v in result.x)
    logger.debug(f"Fractional phases solved: phi={marked:.12f} chi={zero:.12f} overlap={overlap:.15f}")
    return FractionalPhases(marked, zero, overlap)
