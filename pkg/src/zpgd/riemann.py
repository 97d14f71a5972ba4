"""Exact Riemann solutions: interior discontinuity and boundary data."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Constant, DeltaAtom, Fan, Line, PiecewiseSolution, Region, State
from .tracking import Front, FrontSet, clip_initial, run


@dataclass(frozen=True)
class InteriorRiemannData:
    left: State
    right: State
    x0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x0) and self.x0 >= 0):
            raise ValueError(f"x0 must be finite and >= 0, got {self.x0}")


@dataclass(frozen=True)
class BoundaryRiemannData:
    boundary: State
    interior: State


def boundary_case(u_b: float, u0: float) -> int:
    """Wave pattern emitted by constant boundary data against a constant state.

    1: contact, 2: inert boundary, 3: fan behind a boundary state,
    4: fan from x=0, 5: delta shock.  Sign patterns not listed in the
    table (u0 < u_b with u0 + u_b <= 0) are inert.
    """
    if u0 == u_b:
        return 1 if u0 > 0 else 2
    if u_b < u0:
        if u0 <= 0:
            return 2
        return 3 if u_b > 0 else 4
    return 5 if u0 + u_b > 0 else 2


def boundary_waves(boundary: State, interior: State, fs: FrontSet) -> tuple[list[Front], list[Region]]:
    """Fronts and regions of the boundary Riemann solution at t = 0+."""
    ub, rb = boundary.u, boundary.rho
    u0, r0 = interior.u, interior.rho
    case = boundary_case(ub, u0)
    if case == 1:
        if rb == r0:
            return [], [Constant(interior)]
        return [Front(Line(u0, 0.0), 0.0, None, fs.new_id())], [Constant(State(u0, rb)), Constant(interior)]
    if case == 2:
        return [], [Constant(interior)]
    if case == 3:
        return ([Front(Line(ub, 0.0), 0.0, None, fs.new_id()), Front(Line(u0, 0.0), 0.0, None, fs.new_id())],
                [Constant(boundary), Fan(0.0), Constant(interior)])
    if case == 4:
        return [Front(Line(u0, 0.0), 0.0, None, fs.new_id())], [Fan(0.0), Constant(interior)]
    s = 0.5 * (ub + u0)
    k = 0.5 * (ub - u0) * (r0 + rb)
    atom = DeltaAtom(k, 0.0, 0.0, degenerate=(r0 + rb == 0))
    return [Front(Line(s, 0.0), 0.0, atom, fs.new_id())], [Constant(boundary), Constant(interior)]


def interior_waves(left: State, right: State, x0: float, fs: FrontSet) -> tuple[list[Front], list[Region]]:
    ul, rl = left.u, left.rho
    ur, rr = right.u, right.rho
    if ul == ur:
        if rl == rr:
            return [], [Constant(left)]
        return [Front(Line(ul, x0), 0.0, None, fs.new_id())], [Constant(left), Constant(right)]
    if ul < ur:
        return ([Front(Line(ul, x0), 0.0, None, fs.new_id()), Front(Line(ur, x0), 0.0, None, fs.new_id())],
                [Constant(left), Fan(x0), Constant(right)])
    s = 0.5 * (ul + ur)
    atom = DeltaAtom(0.5 * (ul - ur) * (rl + rr), 0.0, 0.0, degenerate=(rl + rr == 0))
    return [Front(Line(s, x0), 0.0, atom, fs.new_id())], [Constant(left), Constant(right)]


def solve_interior_riemann(data: InteriorRiemannData, horizon: float) -> PiecewiseSolution:
    """Riemann solution centred at ``x0`` restricted to the quarter plane.

    There is no boundary data; fronts reaching ``x = 0`` simply leave, which
    splits the time axis into slabs at the exit times.
    """
    fs = FrontSet(0.0, [], [])
    fronts, regions = interior_waves(data.left, data.right, data.x0, fs)
    fronts, regions = clip_initial(fronts, regions)
    fs.fronts, fs.regions = fronts, regions
    return run(fs, horizon)


def solve_boundary_riemann(data: BoundaryRiemannData, horizon: float) -> PiecewiseSolution:
    fs = FrontSet(0.0, [], [], boundary=data.boundary)
    fs.fronts, fs.regions = boundary_waves(data.boundary, data.interior, fs)
    return run(fs, horizon, case=(boundary_case(data.boundary.u, data.interior.u), 0))


def admissible_set_contains(u_b: float, u_trace: float) -> bool:
    """Membership of a boundary trace in the admissible set E(u_b)."""
    if u_b <= 0:
        return u_trace <= 0
    return u_trace == u_b or u_trace <= -u_b


def boundary_trace(sol: PiecewiseSolution, t: float) -> tuple[float, float]:
    """(u, rho) at x -> 0+ from the leftmost region."""
    slab = sol.slab_at(t)
    return slab.regions[0].value(0.0, t)
