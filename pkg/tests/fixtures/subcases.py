"""Closed-form interaction solutions, one per wave pattern.

Each fixture holds data inside the pattern's sign conditions and a
hand-derived closed-form answer: interface positions, region values and
atoms, as functions of t.  Where the naive closed form needed a fix to
satisfy the jump conditions, the fix is tagged in ``corrections``:

    sqrt-curve   x = c + u t + C sqrt(t) instead of the halved drift
    strength     atom strength re-integrated from the jump conditions
    line         post-merge line passes through (x1, t1)
    geometry     interaction point / fan centre / region label fixed
    horizon      closed form only valid up to a later event, horizon cut
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

Value = Callable[[float, float], tuple]


def C(u: float, rho: float) -> Value:
    return lambda x, t: (u, rho)


def F(center: float) -> Value:
    return lambda x, t: ((x - center) / t, 0.0)


@dataclass
class Fixture:
    name: str
    case: tuple[int, int]
    u_b: float
    rho_b: float
    u_L: float
    rho_L: float
    u_R: float
    rho_R: float
    x0: float
    horizon: float
    layout: Callable[[float], tuple[list[float], list[Value], list[tuple[float, float]]]]
    corrections: tuple[str, ...] = field(default=())

    def value(self, x: float, t: float) -> tuple[float, float]:
        fronts, regions, _ = self.layout(t)
        return regions[bisect.bisect_left(fronts, x)](x, t)

    def atoms(self, t: float) -> list[tuple[float, float]]:
        return [(x, e) for x, e in self.layout(t)[2] if x > 0]

    def fronts(self, t: float) -> list[float]:
        return self.layout(t)[0]


def _shock_rate(ul, rl, ur, rr):
    return 0.5 * (ul - ur) * (rl + rr)


def _c1():
    u, rb, rl, rr, x0 = 1.0, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [u * t, u * t + x0], [C(u, rb), C(u, rl), C(u, rr)], []
    return Fixture("case1_sub1", (1, 1), u, rb, u, rl, u, rr, x0, 2.0, lay)


def _c2():
    ub, ur, rb, rl, rr, x0 = 0.5, 1.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return ([ub * t, ub * t + x0, ur * t + x0], [C(ub, rb), C(ub, rl), F(x0), C(ur, rr)], [])
    return Fixture("case1_sub2", (1, 2), ub, rb, ub, rl, ur, rr, x0, 2.0, lay)


def _c3():
    ub, ur, rb, rl, rr, x0 = 1.5, 0.5, 1.5, 1.0, 0.5, 1.0
    s = 0.5 * (ub + ur)
    t1 = 2 * x0 / (ub - ur)
    e1 = _shock_rate(ub, rl, ur, rr) * t1

    def lay(t):
        x = s * t + x0
        if t < t1:
            return [ub * t, x], [C(ub, rb), C(ub, rl), C(ur, rr)], [(x, _shock_rate(ub, rl, ur, rr) * t)]
        return [x], [C(ub, rb), C(ur, rr)], [(x, e1 + _shock_rate(ub, rb, ur, rr) * (t - t1))]
    return Fixture("case1_sub3", (1, 3), ub, rb, ub, rl, ur, rr, x0, 4.0, lay, ("strength",))


def _c4():
    u, rb, rl, rr, x0 = -0.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [u * t + x0], [C(u, rl), C(u, rr)], []
    return Fixture("case2_sub1", (2, 1), u, rb, u, rl, u, rr, x0, 3.0, lay)


def _c5():
    ub, ur, rb, rl, rr, x0 = -1.0, 0.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [ub * t + x0, ur * t + x0], [C(ub, rl), F(x0), C(ur, rr)], []
    return Fixture("case2_sub2", (2, 2), ub, rb, ub, rl, ur, rr, x0, 2.0, lay, ("geometry",))


def _c6():
    ub, ur, rb, rl, rr, x0 = -0.5, -1.5, 1.5, 1.0, 0.5, 2.0
    s = 0.5 * (ub + ur)

    def lay(t):
        x = s * t + x0
        return [x], [C(ub, rl), C(ur, rr)], [(x, _shock_rate(ub, rl, ur, rr) * t)]
    return Fixture("case2_sub3", (2, 3), ub, rb, ub, rl, ur, rr, x0, 1.5, lay)


def _c7():
    ub, u0, rb, rl, rr, x0 = 1.5, 0.5, 1.5, 1.0, 0.5, 1.0
    s = 0.5 * (ub + u0)
    t1 = x0 / (s - u0)
    e1 = _shock_rate(ub, rb, u0, rl) * t1

    def lay(t):
        if t < t1:
            return ([s * t, u0 * t + x0], [C(ub, rb), C(u0, rl), C(u0, rr)],
                    [(s * t, _shock_rate(ub, rb, u0, rl) * t)])
        return [s * t], [C(ub, rb), C(u0, rr)], [(s * t, e1 + _shock_rate(ub, rb, u0, rr) * (t - t1))]
    return Fixture("case3_sub1", (3, 1), ub, rb, u0, rl, u0, rr, x0, 4.0, lay, ("line", "strength"))


def _c8():
    ub, u0, rb, rl, rr, x0 = 0.5, 1.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [ub * t, u0 * t, u0 * t + x0], [C(ub, rb), F(0.0), C(u0, rl), C(u0, rr)], []
    return Fixture("case3_sub2", (3, 2), ub, rb, u0, rl, u0, rr, x0, 2.0, lay)


def _c9():
    ub, u0, rb, rl, rr, x0 = -0.5, 1.0, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [u0 * t, u0 * t + x0], [F(0.0), C(u0, rl), C(u0, rr)], []
    return Fixture("case3_sub3", (3, 3), ub, rb, u0, rl, u0, rr, x0, 2.0, lay)


def _c10():
    ub, u0, rb, rl, rr, x0 = 0.2, -0.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [u0 * t + x0], [C(u0, rl), C(u0, rr)], []
    return Fixture("case3_sub4", (3, 4), ub, rb, u0, rl, u0, rr, x0, 3.0, lay)


def _fan_left_shock(ul, rl, ur, rr, x0):
    """Shock from x0 that enters a fan centred at the origin at t1."""
    s = 0.5 * (ul + ur)
    t1 = x0 / (ul - s)
    x1 = ul * t1
    c = (ul - ur) * math.sqrt(t1)
    e1 = _shock_rate(ul, rl, ur, rr) * t1
    return s, t1, x1, c, e1


def _c11():
    ub, ul, rb, rl, rr, x0 = 0.5, 1.5, 1.5, 1.0, 0.5, 1.0
    ur = ub
    s, t1, x1, c, e1 = _fan_left_shock(ul, rl, ur, rr, x0)

    def lay(t):
        if t < t1:
            x = s * t + x0
            return ([ub * t, ul * t, x], [C(ub, rb), F(0.0), C(ul, rl), C(ur, rr)],
                    [(x, _shock_rate(ul, rl, ur, rr) * t)])
        x = ur * t + c * math.sqrt(t)
        return [ub * t, x], [C(ub, rb), F(0.0), C(ur, rr)], [(x, e1 + rr * c * (math.sqrt(t) - math.sqrt(t1)))]
    return Fixture("case4_sub1", (4, 1), ub, rb, ul, rl, ur, rr, x0, 4.0, lay, ("sqrt-curve", "strength"))


def _shock_into_right_fan(ub, rb, ul, rl, x0):
    """Shock from the origin that enters a fan centred at x0 at t1."""
    s = 0.5 * (ub + ul)
    t1 = x0 / (s - ul)
    c = (ul - ub) * math.sqrt(t1)
    e1 = _shock_rate(ub, rb, ul, rl) * t1
    return s, t1, c, e1


def _c12():
    ub, ul, rb, rl, rr, x0 = 1.0, 0.5, 1.5, 1.0, 0.5, 1.0
    ur = ub
    s, t1, c, e1 = _shock_into_right_fan(ub, rb, ul, rl, x0)

    def lay(t):
        if t < t1:
            return ([s * t, ul * t + x0, ur * t + x0], [C(ub, rb), C(ul, rl), F(x0), C(ur, rr)],
                    [(s * t, _shock_rate(ub, rb, ul, rl) * t)])
        x = x0 + ub * t + c * math.sqrt(t)
        return ([x, ur * t + x0], [C(ub, rb), F(x0), C(ur, rr)],
                [(x, e1 - rb * c * (math.sqrt(t) - math.sqrt(t1)))])
    return Fixture("case4_sub2", (4, 2), ub, rb, ul, rl, ur, rr, x0, 8.0, lay,
                   ("geometry", "sqrt-curve", "strength"))


def _c13():
    ub, ul, rb, rl, rr, x0 = 0.5, -1.0, 1.5, 1.0, 0.5, 1.0
    ur = ub

    def lay(t):
        return [ul * t + x0, ur * t + x0], [C(ul, rl), F(x0), C(ur, rr)], []
    # the fan trace at x=0 leaves the admissible set at t = x0/u_b
    return Fixture("case4_sub3", (4, 3), ub, rb, ul, rl, ur, rr, x0, 1.9, lay, ("horizon",))


def _c14():
    ub, ul, rb, rl, rr, x0 = -0.5, 1.0, 1.5, 1.0, 0.5, 1.0
    ur = ub
    s, t1, x1, c, e1 = _fan_left_shock(ul, rl, ur, rr, x0)

    def lay(t):
        if t < t1:
            x = s * t + x0
            return [ul * t, x], [F(0.0), C(ul, rl), C(ur, rr)], [(x, _shock_rate(ul, rl, ur, rr) * t)]
        x = ur * t + c * math.sqrt(t)
        return [x], [F(0.0), C(ur, rr)], [(x, e1 + rr * c * (math.sqrt(t) - math.sqrt(t1)))]
    return Fixture("case5_sub1", (5, 1), ub, rb, ul, rl, ur, rr, x0, 4.0, lay, ("sqrt-curve", "strength"))


def _c15():
    ub, ul, rb, rl, rr, x0 = -0.5, -1.0, 1.5, 1.0, 0.5, 1.0
    ur = ub

    def lay(t):
        return [ul * t + x0, ur * t + x0], [C(ul, rl), F(x0), C(ur, rr)], []
    return Fixture("case5_sub2", (5, 2), ub, rb, ul, rl, ur, rr, x0, 3.0, lay)


def _c16():
    ub, ul, ur, rb, rl, rr, x0 = 2.0, 0.5, 1.0, 1.5, 1.0, 0.5, 1.0
    s, t1, c, e1 = _shock_into_right_fan(ub, rb, ul, rl, x0)

    def lay(t):
        if t < t1:
            return ([s * t, ul * t + x0, ur * t + x0], [C(ub, rb), C(ul, rl), F(x0), C(ur, rr)],
                    [(s * t, _shock_rate(ub, rb, ul, rl) * t)])
        x = x0 + ub * t + c * math.sqrt(t)
        return ([x, ur * t + x0], [C(ub, rb), F(x0), C(ur, rr)],
                [(x, e1 - rb * c * (math.sqrt(t) - math.sqrt(t1)))])
    # the shock crosses the fan and reaches its right edge at t = 3
    return Fixture("case6_sub1", (6, 1), ub, rb, ul, rl, ur, rr, x0, 2.5, lay,
                   ("geometry", "sqrt-curve", "strength", "horizon"))


def _rarefaction_only(name, case, ub, ul, ur, horizon, corrections=()):
    rb, rl, rr, x0 = 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [ul * t + x0, ur * t + x0], [C(ul, rl), F(x0), C(ur, rr)], []
    return Fixture(name, case, ub, rb, ul, rl, ur, rr, x0, horizon, lay, corrections)


def _c17():
    return _rarefaction_only("case6_sub2", (6, 2), -0.3, -1.0, -0.6, 3.0)


def _c18():
    ub, ul, ur, rb, rl, rr, x0 = 0.5, 1.0, 1.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return ([ub * t, ul * t, ul * t + x0, ur * t + x0], [C(ub, rb), F(0.0), C(ul, rl), F(x0), C(ur, rr)], [])
    return Fixture("case6_sub3", (6, 3), ub, rb, ul, rl, ur, rr, x0, 2.0, lay)


def _c19():
    ub, ul, ur, rb, rl, rr, x0 = -0.5, 0.5, 1.5, 1.5, 1.0, 0.5, 1.0

    def lay(t):
        return [ul * t, ul * t + x0, ur * t + x0], [F(0.0), C(ul, rl), F(x0), C(ur, rr)], []
    return Fixture("case6_sub4", (6, 4), ub, rb, ul, rl, ur, rr, x0, 2.0, lay)


def _c20():
    return _rarefaction_only("case6_sub5", (6, 5), -1.0, -0.5, 1.0, 3.0)


def _c21():
    ub, ul, ur, rb, rl, rr, x0 = -1.5, -0.5, -1.0, 1.5, 1.0, 0.5, 1.0
    s = 0.5 * (ul + ur)

    def lay(t):
        x = s * t + x0
        return [x], [C(ul, rl), C(ur, rr)], [(x, _shock_rate(ul, rl, ur, rr) * t)]
    # leaves through x=0 at t = 4/3
    return Fixture("case6_sub6", (6, 6), ub, rb, ul, rl, ur, rr, x0, 1.2, lay, ("strength",))


def _fan_then_sqrt(name, case, ub, ul, ur, horizon, corrections):
    rb, rl, rr, x0 = 1.5, 1.0, 0.5, 1.0
    s, t1, x1, c, e1 = _fan_left_shock(ul, rl, ur, rr, x0)
    head = [C(ub, rb)] if ub > 0 else []

    def lay(t):
        lead = [ub * t] if ub > 0 else []
        if t < t1:
            x = s * t + x0
            return (lead + [ul * t, x], head + [F(0.0), C(ul, rl), C(ur, rr)],
                    [(x, _shock_rate(ul, rl, ur, rr) * t)])
        x = ur * t + c * math.sqrt(t)
        return lead + [x], head + [F(0.0), C(ur, rr)], [(x, e1 + rr * c * (math.sqrt(t) - math.sqrt(t1)))]
    return Fixture(name, case, ub, rb, ul, rl, ur, rr, x0, horizon, lay, corrections)


def _c22():
    return _fan_then_sqrt("case6_sub7", (6, 7), -0.5, 1.5, 0.5, 4.0, ("sqrt-curve", "strength"))


def _c23():
    return _fan_then_sqrt("case6_sub8", (6, 8), 0.25, 1.5, 0.5, 4.0, ("sqrt-curve", "strength", "geometry"))


def _c24():
    ub, ul, ur, rb, rl, rr, x0 = 1.0, 0.5, 1.5, 1.5, 1.0, 0.5, 1.0
    s, t1, c, e1 = _shock_into_right_fan(ub, rb, ul, rl, x0)

    def lay(t):
        if t < t1:
            return ([s * t, ul * t + x0, ur * t + x0], [C(ub, rb), C(ul, rl), F(x0), C(ur, rr)],
                    [(s * t, _shock_rate(ub, rb, ul, rl) * t)])
        x = x0 + ub * t + c * math.sqrt(t)
        return ([x, ur * t + x0], [C(ub, rb), F(x0), C(ur, rr)],
                [(x, e1 - rb * c * (math.sqrt(t) - math.sqrt(t1)))])
    return Fixture("case6_sub9", (6, 9), ub, rb, ul, rl, ur, rr, x0, 6.0, lay,
                   ("sqrt-curve", "strength"))


def _c25():
    ub, ul, ur, rb, rl, rr, x0 = 2.0, 1.0, 0.5, 1.5, 1.0, 0.5, 1.0
    sa, sb = 0.5 * (ub + ul), 0.5 * (ul + ur)
    t1 = x0 / (sa - sb)
    x1 = sa * t1
    e1 = (_shock_rate(ub, rb, ul, rl) + _shock_rate(ul, rl, ur, rr)) * t1
    s = 0.5 * (ub + ur)

    def lay(t):
        if t < t1:
            return ([sa * t, sb * t + x0], [C(ub, rb), C(ul, rl), C(ur, rr)],
                    [(sa * t, _shock_rate(ub, rb, ul, rl) * t), (sb * t + x0, _shock_rate(ul, rl, ur, rr) * t)])
        x = x1 + s * (t - t1)
        return [x], [C(ub, rb), C(ur, rr)], [(x, e1 + _shock_rate(ub, rb, ur, rr) * (t - t1))]
    return Fixture("case6_sub10", (6, 10), ub, rb, ul, rl, ur, rr, x0, 3.0, lay, ("line", "strength"))


def _c26():
    ub, ul, ur, rb, rl, rr, x0 = -0.5, -1.0, -1.5, 1.5, 1.0, 0.5, 1.0
    s = 0.5 * (ul + ur)

    def lay(t):
        x = s * t + x0
        return [x], [C(ul, rl), C(ur, rr)], [(x, _shock_rate(ul, rl, ur, rr) * t)]
    # the atom leaves through x=0 at t = 0.8 and the right state fills x > 0
    return Fixture("case6_sub11", (6, 11), ub, rb, ul, rl, ur, rr, x0, 1.5, lay, ("strength",))


def _c27():
    # the shock reaches the fan's left edge u_b t at t = 12
    return _fan_then_sqrt("case6_sub12", (6, 12), 1.0, 2.0, 0.5, 4.0, ("sqrt-curve", "strength", "horizon"))


def _c28():
    # exits through x=0 at t = 4
    return _fan_then_sqrt("case6_sub13", (6, 13), -0.5, 1.0, -1.0, 3.0, ("sqrt-curve", "strength"))


FIXTURES: list[Fixture] = [f() for f in (
    _c1, _c2, _c3, _c4, _c5, _c6, _c7, _c8, _c9, _c10, _c11, _c12, _c13, _c14,
    _c15, _c16, _c17, _c18, _c19, _c20, _c21, _c22, _c23, _c24, _c25, _c26, _c27, _c28,
)]

# boundary Riemann fixtures (x0 = 0): (u_b, rho_b, u0, rho0)
BOUNDARY_CASES: dict[int, tuple[float, float, float, float]] = {
    1: (1.0, 2.0, 1.0, 1.0),
    2: (-1.0, 1.0, -2.0, 1.0),
    3: (0.5, 1.0, 1.5, 1.0),
    4: (-0.5, 1.0, 1.0, 1.0),
    5: (1.0, 1.0, -0.5, 1.0),
}
