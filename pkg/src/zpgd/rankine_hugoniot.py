"""Jump conditions for delta shocks and their closed-form solutions.

Sign convention: for a front with left trace ``(u-, rho-)`` and right trace
``(u+, rho+)`` the point mass grows at

    e'(t) = s'(t) (rho+ - rho-) - (rho+ u+ - rho- u-)

which is the accretion rate of the mass swept up by the front.  It gives
``e(t) = (u_L - u_R)(rho_L + rho_R) t / 2`` for the straight Riemann shock.
The opposite orientation is available through ``flipped=True``.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import DeltaAtom, SqrtCurve


class InvalidAnchor(ValueError):
    pass


class NegativeStrength(ValueError):
    pass


@dataclass(frozen=True)
class SideTrace:
    """Region trace next to a front: a constant state or a fan centred at ``center``."""

    u: float | None = None
    rho: float = 0.0
    center: float | None = None

    @classmethod
    def constant(cls, u: float, rho: float) -> "SideTrace":
        return cls(u=u, rho=rho)

    @classmethod
    def fan(cls, center: float) -> "SideTrace":
        return cls(center=center)

    @property
    def is_fan(self) -> bool:
        return self.center is not None

    def value(self, x: float, t: float) -> tuple[float, float]:
        if self.is_fan:
            return (x - self.center) / t, 0.0
        return self.u, self.rho


StrengthLaw = DeltaAtom


def shock_speed(u_minus: float, u_plus: float) -> float:
    return 0.5 * (u_minus + u_plus)


def strength_rate(s_prime: float, left: tuple[float, float], right: tuple[float, float],
                  flipped: bool = False) -> float:
    """Rate of change of the delta strength; ``left``/``right`` are (u, rho)."""
    (ul, rl), (ur, rr) = left, right
    rate = s_prime * (rr - rl) - (rr * ur - rl * ul)
    return -rate if flipped else rate


def shock_into_fan_curve(fan_center_x: float, u_const: float, t1: float, x1: float) -> SqrtCurve:
    """Solve ``dx/dt = ((x - c)/t + u)/2`` through ``(t1, x1)``."""
    if not t1 > 0:
        raise InvalidAnchor(f"anchor time must be positive, got {t1}")
    coeff = (x1 - fan_center_x - u_const * t1) / math.sqrt(t1)
    return SqrtCurve(fan_center_x, u_const, coeff)


def strength_along_sqrt(curve: SqrtCurve, const_side: tuple[float, float], fan_on: str,
                        t1: float, e1: float, t_end: float = math.inf) -> DeltaAtom:
    """Strength law of a delta shock travelling through a fan.

    Along the curve ``s' - u_const = C/(2 sqrt t)``; the constant side is the
    only one carrying mass, so ``e`` changes by ``+-rho C (sqrt t - sqrt t1)``.
    """
    u_k, rho_k = const_side
    if fan_on == "left":
        beta = rho_k * curve.coeff
    elif fan_on == "right":
        beta = -rho_k * curve.coeff
    else:
        raise ValueError("fan_on must be 'left' or 'right'")
    law = DeltaAtom(0.0, beta, e1 - beta * math.sqrt(t1))
    # beta * sqrt(t) is monotone, so the minimum sits at an end of the lifetime
    ends = [t1] + ([t_end] if math.isfinite(t_end) else [])
    if beta < 0 and not math.isfinite(t_end):
        raise NegativeStrength("strength decreases without bound")
    if min(law.strength(t) for t in ends) < -1e-12:
        raise NegativeStrength(f"strength becomes negative on [{t1}, {t_end}]")
    return law


def line_strength(t1: float, e1: float, speed: float, left: tuple[float, float],
                  right: tuple[float, float]) -> DeltaAtom:
    k = strength_rate(speed, left, right)
    return DeltaAtom(k, 0.0, e1 - k * t1)


OdeSpec = Callable[[float, np.ndarray], np.ndarray]


def rk4(rhs: OdeSpec, t1: float, y1: Sequence[float], t_end: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Classical fourth-order Runge-Kutta; returns (times, states)."""
    if steps < 1:
        raise ValueError("steps must be positive")
    h = (t_end - t1) / steps
    ts = t1 + h * np.arange(steps + 1)
    ys = np.empty((steps + 1, len(y1)))
    y = np.asarray(y1, dtype=float)
    ys[0] = y
    t = t1
    for n in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t1 + (n + 1) * h
        ys[n + 1] = y
    return ts, ys


def ode_oracle(rhs: OdeSpec, t1: float, y1: Sequence[float], t_end: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    if steps < 100:
        raise ValueError("the oracle needs at least 100 steps")
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    return rk4(rhs, t1, y1, t_end, steps)


def front_rhs(left: SideTrace, right: SideTrace, flipped: bool = False) -> OdeSpec:
    """Right-hand side of the coupled (x, e) system for a front between two traces."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        x = y[0]
        lt, rt = left.value(x, t), right.value(x, t)
        s = shock_speed(lt[0], rt[0])
        return np.array([s, strength_rate(s, lt, rt, flipped=flipped)])

    return rhs


def half_drift_curve(u_const: float, t1: float, x1: float) -> Callable[[float], float]:
    """Curve with drift u/2 in place of u; it fails the front ODE unless u = 0."""
    c = x1 / math.sqrt(t1) - 0.5 * u_const * math.sqrt(t1)
    return lambda t: 0.5 * u_const * t + c * math.sqrt(t)


def half_drift_residual(u_const: float, t1: float, x1: float, t: float, fan_center_x: float = 0.0) -> float:
    """``dx/dt - ((x - c)/t + u)/2`` for the half-drift curve."""
    c = x1 / math.sqrt(t1) - 0.5 * u_const * math.sqrt(t1)
    x = 0.5 * u_const * t + c * math.sqrt(t)
    dx = 0.5 * u_const + 0.5 * c / math.sqrt(t)
    return dx - 0.5 * ((x - fan_center_x) / t + u_const)
