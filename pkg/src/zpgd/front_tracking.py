"""Interaction of the boundary Riemann solution at the origin with the
interior Riemann solution at ``x0``.

The solver is generic event-driven front tracking; the case labels only
describe which pattern the data falls into.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import PiecewiseSolution, State
from .riemann import boundary_case, boundary_waves, interior_waves
from .tracking import (  # noqa: F401  re-exported for callers
    Event,
    EventCap,
    FrontSet,
    UnresolvedConfiguration,
    next_event as _next_event,
    resolve_event,
    run,
)


@dataclass(frozen=True)
class ProblemData:
    boundary: State
    left: State
    right: State
    x0: float
    horizon: float

    def __post_init__(self):
        if self.x0 == 0:
            raise ValueError("x0 = 0 is a boundary Riemann problem; use riemann.solve_boundary_riemann")
        if not (self.x0 > 0 and math.isfinite(self.x0)):
            raise ValueError(f"x0 must be positive and finite, got {self.x0}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")


@dataclass(frozen=True)
class CaseLabel:
    case: int
    subcase: int

    def __str__(self) -> str:
        return f"Case {self.case} Subcase {self.subcase}"


def _boundary_kind(ub: float, ul: float) -> str:
    # S: delta shock from the origin, R: fan behind the boundary state,
    # F: fan touching x=0, I: inert boundary
    return {1: "C", 2: "I", 3: "R", 4: "F", 5: "S"}[boundary_case(ub, ul)]


def classify_case(data: ProblemData) -> CaseLabel:
    ub, ul, ur = data.boundary.u, data.left.u, data.right.u

    def by_interior(sub_eq: int, sub_lt: int, sub_gt: int) -> int:
        if ur == ul:
            return sub_eq
        return sub_lt if ul < ur else sub_gt

    if ul == ub and ub > 0:
        return CaseLabel(1, by_interior(1, 2, 3))
    if ul == ub:
        return CaseLabel(2, by_interior(1, 2, 3))
    bk = _boundary_kind(ub, ul)
    if ul == ur:
        return CaseLabel(3, {"S": 1, "R": 2, "F": 3, "I": 4}[bk])
    if ur == ub and ub > 0:
        if ur < ul:
            return CaseLabel(4, 1)
        return CaseLabel(4, 2 if bk == "S" else 3)
    if ur == ub:
        return CaseLabel(5, 1 if ul > ur else 2)
    if ul < ur:
        if bk == "S":
            sub = 1 if ur < ub else 9
        elif bk == "I":
            sub = 2 if ur < ub else 5
        elif bk == "R":
            sub = 3
        else:
            sub = 4
    else:
        if bk == "S":
            sub = 10
        elif bk == "I":
            sub = 11 if ur < ub else 6
        elif bk == "F":
            sub = 13 if ur < ub else 7
        else:
            sub = 12 if ur < ub else 8
    return CaseLabel(6, sub)


def initial_fronts(data: ProblemData) -> FrontSet:
    """Boundary waves and interior waves side by side, sharing the middle state."""
    fs = FrontSet(0.0, [], [], boundary=data.boundary)
    bf, br = boundary_waves(data.boundary, data.left, fs)
    inf, inr = interior_waves(data.left, data.right, data.x0, fs)
    # br ends with the (u_L, rho_L) region and inr starts with it
    fs.fronts = bf + inf
    fs.regions = br[:-1] + inr
    return fs


def next_event(fronts: FrontSet, t_now: float, horizon: float) -> Event:
    fronts.t = t_now
    return _next_event(fronts, horizon)


def evolve(data: ProblemData) -> PiecewiseSolution:
    label = classify_case(data)
    fs = initial_fronts(data)
    return run(fs, data.horizon, case=(label.case, label.subcase))
