"""Closed-form ground truth for the two-car braking scenario.

A single braking car obeys x' = v, v' = -a - b v^2; the formulas below give
its stopping distance and trajectory in closed form.  Safety of a gap/velocity
configuration reduces to comparing stopping distances, which is what every
estimator in this package is scored against.

All functions broadcast over numpy arrays; scalar inputs give scalar outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AccAnalyticState",
    "analytic_position",
    "analytic_velocity",
    "boundary_gap",
    "is_safe",
    "safety_margin",
    "stopping_distance",
]


@dataclass(frozen=True)
class AccAnalyticState:
    """Abbreviations for the closed-form solution: alpha = arctan(sqrt(b/a) v0),
    beta = sqrt(a b).  The car stops at t = alpha / beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < math.pi / 2):
            raise ValueError(f"alpha out of range: {self.alpha}")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @classmethod
    def from_initial(cls, v0: float, a: float, b: float) -> "AccAnalyticState":
        _check_params(v0, a, b)
        return cls(alpha=math.atan(math.sqrt(b / a) * v0), beta=math.sqrt(a * b))

    @property
    def t_stop(self) -> float:
        return self.alpha / self.beta


def _check_params(v0, a, b):
    if np.any(np.asarray(v0) < 0):
        raise ValueError("initial velocity must be nonnegative")
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")


def stopping_distance(v0, a: float, b: float):
    """Distance traveled before a full stop: (1/2b) ln(1 + (b/a) v0^2)."""
    _check_params(v0, a, b)
    return np.log1p((b / a) * np.square(v0)) / (2.0 * b)


def analytic_velocity(v0: float, a: float, b: float, t: float) -> float:
    """Velocity at time t in [0, t_stop]: sqrt(a/b) tan(alpha - beta t)."""
    st = AccAnalyticState.from_initial(v0, a, b)
    arg = _tan_argument(st, t)
    return math.sqrt(a / b) * math.tan(arg)


def analytic_position(v0: float, a: float, b: float, t: float) -> float:
    """Distance traveled by time t in [0, t_stop]: (1/b) ln(cos(alpha - beta t)/cos(alpha))."""
    st = AccAnalyticState.from_initial(v0, a, b)
    arg = _tan_argument(st, t)
    return math.log(math.cos(arg) / math.cos(st.alpha)) / b


def _tan_argument(st: AccAnalyticState, t: float) -> float:
    # Past the stopping time the tangent solution leaves the physical regime.
    if t < 0 or t > st.t_stop * (1 + 1e-12):
        raise ValueError(f"t={t} outside the physical regime [0, {st.t_stop}]")
    return max(st.alpha - st.beta * t, 0.0)


def safety_margin(h0, vl0, vf0, a: float = 4.9, b: float = 1.0):
    """Signed margin h0 + stop(vl0) - stop(vf0); nonnegative means no collision."""
    return h0 + stopping_distance(vl0, a, b) - stopping_distance(vf0, a, b)


def is_safe(h0, vl0, vf0, a: float = 4.9, b: float = 1.0):
    """True iff the follower stops before closing the initial gap (margin >= 0)."""
    return safety_margin(h0, vl0, vf0, a, b) >= 0.0


def boundary_gap(vl0, vf0, a: float = 4.9, b: float = 1.0):
    """Smallest initial gap that is still safe, as a function of the velocities."""
    return stopping_distance(vf0, a, b) - stopping_distance(vl0, a, b)
