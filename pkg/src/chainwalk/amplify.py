"""Amplitude amplification in the two-dimensional good/bad plane.

A state is a pair of real amplitudes ``(bad, good)``. Each amplification
iterate rotates it by twice the angle ``alpha = arcsin(sqrt(eps))`` where
``eps`` is the marked fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, GuaranteeUnavailableError

# Slack for the floor computations so exact boundaries like eps = 1/4 land on
# the mathematically correct integer despite rounding in asin/pi.
_FLOOR_SLACK = 1e-12


@dataclass(frozen=True)
class TwoDState:
    bad_amp: float
    good_amp: float

    @classmethod
    def uniform(cls, eps: float) -> "TwoDState":
        a = angle(eps)
        return cls(math.cos(a), math.sin(a))

    @classmethod
    def all_bad(cls) -> "TwoDState":
        return cls(1.0, 0.0)

    @property
    def success_probability(self) -> float:
        return self.good_amp * self.good_amp


@dataclass(frozen=True)
class AmplSchedule:
    epsilon: float
    alpha: float
    iters_uniform: int
    iters_bad: int


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0 or math.isnan(eps):
        raise DomainError(f"epsilon must lie in (0, 1], got {eps}")
    return eps


def angle(eps: float) -> float:
    return math.asin(math.sqrt(_check_eps(eps)))


def schedule(eps: float) -> AmplSchedule:
    """Iteration counts when starting from the uniform or the all-bad state."""
    a = angle(eps)
    n_uni = math.floor((math.pi / 2 - a) / (2 * a) + _FLOOR_SLACK)
    n_bad = math.floor((math.pi / 2) / (2 * a) + _FLOOR_SLACK)
    return AmplSchedule(float(eps), a, max(n_uni, 0), max(n_bad, 0))


def rotate(state: TwoDState, theta: float) -> TwoDState:
    """Advance the state's angle by ``theta`` radians."""
    c, s = math.cos(theta), math.sin(theta)
    return TwoDState(
        c * state.bad_amp - s * state.good_amp, s * state.bad_amp + c * state.good_amp
    )


def iterate(state: TwoDState, alpha: float, k: int) -> TwoDState:
    """Apply ``k`` amplification iterates, each a rotation by ``2 alpha``."""
    if k < 0:
        raise DomainError("iteration count must be non-negative")
    return rotate(state, 2 * alpha * k)


def success_probabilities(eps: float) -> tuple[float, float]:
    """Final success probability from the uniform start and from the all-bad start."""
    eps = _check_eps(eps)
    if eps > 0.5:
        raise GuaranteeUnavailableError(f"guarantee needs epsilon <= 1/2, got {eps}")
    sch = schedule(eps)
    a = sch.alpha
    return (
        math.sin(a + 2 * sch.iters_uniform * a) ** 2,
        math.sin(2 * sch.iters_bad * a) ** 2,
    )


def lower_bound(eps: float) -> float:
    a = angle(eps)
    return 1.0 - 4.0 * a * a


def repeat_until_success(
    eps: float, rng: np.random.Generator, max_rounds: int = 1_000_000
) -> Optional[int]:
    """Rounds needed when round one starts uniform and every later round starts all-bad.

    Returns ``None`` if ``max_rounds`` rounds all fail.
    """
    if max_rounds < 1:
        raise DomainError("max_rounds must be at least 1")
    p_uni, p_bad = success_probabilities(eps)
    for r in range(1, max_rounds + 1):
        p = p_uni if r == 1 else p_bad
        if rng.random() < p:
            return r
    return None


def expected_rounds(eps: float) -> float:
    p_uni, p_bad = success_probabilities(eps)
    return 1.0 + (1.0 - p_uni) / p_bad
