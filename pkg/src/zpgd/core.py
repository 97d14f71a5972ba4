"""Solution representation shared by the exact solvers.

A solution of the pressureless system on ``x > 0, t > 0`` is stored as a
sequence of time slabs.  Inside a slab the fronts (shocks, contacts, fan
edges) are ordered left to right and never cross; between two fronts lives a
region that is either a constant state or a centred rarefaction fan.  Front
paths are kept in closed form so every derived quantity is exact up to
rounding.
"""
from __future__ import annotations

import bisect
import math
import sys
from dataclasses import dataclass, field
from typing import Union

ON_FRONT_TOL = 1e-12


class OutOfHorizon(ValueError):
    pass


@dataclass(frozen=True)
class State:
    u: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.rho)):
            raise ValueError(f"non-finite state {self!r}")
        # subnormal speeds make front positions and strengths underflow to 0
        if 0 < abs(self.u) < sys.float_info.min:
            object.__setattr__(self, "u", 0.0)


@dataclass(frozen=True)
class Constant:
    state: State

    def value(self, x: float, t: float) -> tuple[float, float]:
        return self.state.u, self.state.rho


@dataclass(frozen=True)
class Fan:
    """Centred rarefaction ``u = (x - center)/t`` carrying no mass."""

    center: float

    def value(self, x: float, t: float) -> tuple[float, float]:
        return (x - self.center) / t, 0.0


Region = Union[Constant, Fan]


@dataclass(frozen=True)
class DeltaAtom:
    """Point mass with strength ``alpha*t + beta*sqrt(t) + gamma``."""

    alpha: float
    beta: float
    gamma: float
    degenerate: bool = False

    def strength(self, t: float) -> float:
        return self.alpha * t + self.beta * math.sqrt(t) + self.gamma

    def rate(self, t: float) -> float:
        return self.alpha + 0.5 * self.beta / math.sqrt(t)


@dataclass(frozen=True)
class Line:
    speed: float
    intercept: float

    def position(self, t: float) -> float:
        return self.speed * t + self.intercept

    def velocity(self, t: float) -> float:
        return self.speed

    def coefficients(self) -> tuple[float, float, float]:
        # x(t) = a + b t + c sqrt(t)
        return self.intercept, self.speed, 0.0


@dataclass(frozen=True)
class SqrtCurve:
    """``x(t) = center + u_const*t + coeff*sqrt(t)``: a shock inside a fan."""

    center: float
    u_const: float
    coeff: float

    def position(self, t: float) -> float:
        return self.center + self.u_const * t + self.coeff * math.sqrt(t)

    def velocity(self, t: float) -> float:
        return self.u_const + 0.5 * self.coeff / math.sqrt(t)

    def coefficients(self) -> tuple[float, float, float]:
        return self.center, self.u_const, self.coeff


Path = Union[Line, SqrtCurve]


@dataclass(frozen=True)
class FrontCurve:
    path: Path
    t_start: float
    t_end: float = math.inf
    atom: DeltaAtom | None = None
    ident: int = 0

    def position(self, t: float) -> float:
        return self.path.position(t)

    def velocity(self, t: float) -> float:
        return self.path.velocity(t)

    def strength(self, t: float) -> float:
        return 0.0 if self.atom is None else self.atom.strength(t)


@dataclass(frozen=True)
class TimeSlab:
    t_lo: float
    t_hi: float
    fronts: tuple[FrontCurve, ...]
    regions: tuple[Region, ...]

    def positions(self, t: float) -> list[float]:
        return [f.position(t) for f in self.fronts]


@dataclass(frozen=True)
class ExitRecord:
    time: float
    mass: float


@dataclass(frozen=True)
class PiecewiseSolution:
    slabs: tuple[TimeSlab, ...]
    horizon: float
    boundary: State | None = None
    case: tuple[int, int] | None = None
    exits: tuple[ExitRecord, ...] = ()
    events: tuple[dict, ...] = field(default=(), compare=False)

    def slab_at(self, t: float) -> TimeSlab:
        if t <= 0:
            raise ValueError("t must be positive; initial data belongs to the scenario")
        if t > self.horizon * (1 + 1e-15):
            raise OutOfHorizon(f"t={t} beyond horizon {self.horizon}")
        his = [s.t_hi for s in self.slabs]
        k = min(bisect.bisect_left(his, t), len(self.slabs) - 1)
        return self.slabs[k]

    def fronts(self) -> list[FrontCurve]:
        seen: dict[int, FrontCurve] = {}
        for slab in self.slabs:
            for f in slab.fronts:
                seen.setdefault(id(f), f)
        return list(seen.values())


@dataclass(frozen=True)
class SolutionSample:
    u: float
    rho_regular: float
    atoms: tuple[tuple[float, float], ...] = ()


def locate(slab: TimeSlab, x: float, t: float) -> tuple[int, int | None]:
    """Return (region index, index of the front at ``x`` or None)."""
    pos = slab.positions(t)
    k = bisect.bisect_left(pos, x)
    for j in (k - 1, k):
        if 0 <= j < len(pos) and abs(pos[j] - x) <= ON_FRONT_TOL:
            return j, j
    return k, None


def evaluate(sol: PiecewiseSolution, x: float, t: float) -> SolutionSample:
    """Point value of the limit solution.

    On a front the sample reports the mean velocity and mean regular density
    of the two neighbouring traces plus the atom (if the front carries one).
    """
    if x <= 0:
        raise ValueError("x must be positive")
    slab = sol.slab_at(t)
    k, on = locate(slab, x, t)
    if on is None:
        u, rho = slab.regions[k].value(x, t)
        return SolutionSample(u, rho)
    front = slab.fronts[on]
    ul, rl = slab.regions[on].value(x, t)
    ur, rr = slab.regions[on + 1].value(x, t)
    atoms = ((front.position(t), front.strength(t)),) if front.atom is not None else ()
    return SolutionSample(0.5 * (ul + ur), 0.5 * (rl + rr), atoms)


def atoms_at(sol: PiecewiseSolution, t: float) -> list[tuple[float, float]]:
    slab = sol.slab_at(t)
    return [(f.position(t), f.strength(t)) for f in slab.fronts if f.atom is not None]


def traces(slab: TimeSlab, i: int, t: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """(u, rho) immediately left and right of front ``i`` at time ``t``."""
    x = slab.fronts[i].position(t)
    return slab.regions[i].value(x, t), slab.regions[i + 1].value(x, t)


@dataclass(frozen=True)
class Violation:
    rule: str
    slab: int
    front: int | None
    detail: str = ""


def _states_equal(a: Region, b: Region) -> bool:
    return a == b


def validate(sol: PiecewiseSolution, samples: int = 16) -> list[Violation]:
    out: list[Violation] = []
    if not sol.slabs:
        return [Violation("Empty", 0, None)]
    if sol.slabs[0].t_lo != 0.0:
        out.append(Violation("SlabPartition", 0, None, "first slab must start at 0"))
    if abs(sol.slabs[-1].t_hi - sol.horizon) > 1e-12 * max(1.0, sol.horizon):
        out.append(Violation("SlabPartition", len(sol.slabs) - 1, None, "last slab must end at horizon"))
    for k, slab in enumerate(sol.slabs):
        if not slab.t_lo < slab.t_hi:
            out.append(Violation("SlabPartition", k, None, "empty slab"))
        if k and sol.slabs[k - 1].t_hi != slab.t_lo:
            out.append(Violation("SlabPartition", k, None, "gap between slabs"))
        if len(slab.regions) != len(slab.fronts) + 1:
            out.append(Violation("RegionCount", k, None))
            continue
        for r in slab.regions:
            if isinstance(r, Fan) and r.center < 0:
                out.append(Violation("FanCenter", k, None, f"center {r.center}"))
        ts = [slab.t_lo + (slab.t_hi - slab.t_lo) * (j + 0.5) / samples for j in range(samples)]
        for i, f in enumerate(slab.fronts):
            if f.t_start > slab.t_lo + 1e-12 or f.t_end < slab.t_hi - 1e-12:
                out.append(Violation("Lifetime", k, i))
            if f.atom is not None and f.atom.strength(max(f.t_start, 1e-300)) < -1e-12:
                out.append(Violation("NegativeStrength", k, i, f"e={f.atom.strength(f.t_start)}"))
            a, b = slab.regions[i], slab.regions[i + 1]
            if _states_equal(a, b) and (f.atom is None or f.atom.degenerate):
                out.append(Violation("SpuriousFront", k, i))
            for t in ts:
                if f.position(t) <= 0:
                    out.append(Violation("NonpositivePosition", k, i, f"t={t}"))
                    break
        for t in ts:
            pos = slab.positions(t)
            # equal positions are allowed: a fan narrower than rounding has coincident edges
            bad = [i for i in range(len(pos) - 1) if pos[i] > pos[i + 1]]
            if bad:
                out.append(Violation("FrontsCross", k, bad[0], f"t={t}"))
                break
        if k:
            prev = sol.slabs[k - 1]
            old = {id(f) for f in prev.fronts}
            pos_prev = prev.positions(slab.t_lo)
            for i, f in enumerate(slab.fronts):
                if id(f) in old:
                    continue
                x = f.position(slab.t_lo)
                if x > 1e-9 and not any(abs(x - p) <= 1e-9 * max(1.0, abs(x)) for p in pos_prev):
                    out.append(Violation("Discontinuity", k, i, f"new front at x={x}"))
    return out
