"""Event-driven front tracking kernel.

Every front obeys ``s' = (u- + u+)/2`` and carries a strength law obtained from
the jump condition, so a front path is fixed by its two neighbouring regions
and one anchor point.  Between events the paths are closed-form; event times
reduce to roots of quadratics in ``sqrt(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .core import (
    Constant,
    DeltaAtom,
    ExitRecord,
    Fan,
    FrontCurve,
    Line,
    PiecewiseSolution,
    Region,
    SqrtCurve,
    State,
    TimeSlab,
)
from .rankine_hugoniot import line_strength, shock_into_fan_curve

MERGE_TOL = 1e-9
DISC_TOL = 1e-14
MAX_EVENTS = 64


class UnresolvedConfiguration(RuntimeError):
    pass


class EventCap(RuntimeError):
    pass


@dataclass
class Front:
    """Mutable front record used while tracking."""

    path: Line | SqrtCurve
    t_start: float
    atom: DeltaAtom | None
    ident: int
    t_end: float = math.inf

    def position(self, t: float) -> float:
        return self.path.position(t)

    def strength(self, t: float) -> float:
        return 0.0 if self.atom is None else self.atom.strength(t)


@dataclass(frozen=True)
class Event:
    time: float
    position: float
    kind: str  # FrontCollision | FanEdgeMerge | BoundaryExit | BoundaryActivation | HorizonReached
    fronts: tuple[int, ...] = ()


@dataclass
class FrontSet:
    t: float
    fronts: list[Front]
    regions: list[Region]
    boundary: State | None = None
    next_id: int = 0
    exits: list[ExitRecord] = field(default_factory=list)

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1


def _u_of(region: Region, x: float, t: float) -> float:
    return region.value(x, t)[0]


def make_front(left: Region, right: Region, t0: float, x0: float, e0: float, ident: int) -> Front | None:
    """Front between two regions through ``(t0, x0)`` with strength ``e0`` there.

    Returns None when the regions join continuously and no mass sits on the
    front.
    """
    if isinstance(left, Constant) and isinstance(right, Constant):
        (ul, rl), (ur, rr) = (left.state.u, left.state.rho), (right.state.u, right.state.rho)
        if ul < ur:
            raise UnresolvedConfiguration(f"rarefaction born at t={t0} x={x0}")
        speed = 0.5 * (ul + ur)
        path = Line(speed, x0 - speed * t0)
        if ul == ur:
            if rl == rr and e0 == 0.0:
                return None
            atom = DeltaAtom(0.0, 0.0, e0) if e0 != 0.0 else None
            return Front(path, t0, atom, ident)
        atom = line_strength(t0, e0, speed, (ul, rl), (ur, rr))
        if rl == 0.0 and rr == 0.0 and e0 == 0.0:
            atom = replace(atom, degenerate=True)
        return Front(path, t0, atom, ident)
    if isinstance(left, Fan) and isinstance(right, Fan):
        raise UnresolvedConfiguration(f"front between two fans at t={t0} x={x0}")
    if t0 <= 0:
        raise UnresolvedConfiguration("fan-bounded front anchored at t=0")
    fan, const, fan_left = (left, right, True) if isinstance(left, Fan) else (right, left, False)
    uk, rk = const.state.u, const.state.rho
    curve = shock_into_fan_curve(fan.center, uk, t0, x0)
    c = curve.coeff
    if abs(c) <= 1e-12 * max(1.0, abs(x0)) / math.sqrt(t0) and e0 == 0.0:
        # characteristic edge of the fan
        return Front(Line(uk, fan.center), t0, None, ident)
    if (fan_left and c < 0) or (not fan_left and c > 0):
        raise UnresolvedConfiguration(f"non-compressive front against a fan at t={t0} x={x0}")
    beta = rk * c if fan_left else -rk * c
    atom = DeltaAtom(0.0, beta, e0 - beta * math.sqrt(t0), degenerate=(rk == 0.0 and e0 == 0.0))
    return Front(curve, t0, atom, ident)


def _roots_sqrt(a: float, b: float, c: float, s_now: float) -> float:
    """Smallest t with a + b t + c sqrt(t) = 0 and sqrt(t) > s_now."""
    eps = 1e-11 * max(1.0, s_now)
    cands = []
    if abs(b) < 1e-300:
        if c != 0:
            cands.append(-a / c)
    else:
        disc = c * c - 4 * b * a
        scale = max(c * c, abs(4 * b * a), 1e-300)
        if disc < 0 and disc > -DISC_TOL * scale:
            disc = 0.0
        if disc >= 0:
            sq = math.sqrt(disc)
            q = -0.5 * (c + math.copysign(sq, c)) if c != 0 else 0.5 * sq
            if q != 0:
                cands.extend([q / b, a / q])
            else:
                cands.append(0.0)
    # keep genuine sign changes only; tangencies (double roots) are not events
    good = []
    for s in cands:
        # roots past sqrt(t) = 1e100 are beyond any horizon; squaring them would overflow
        if s_now + eps < s < 1e100:
            d = 1e-6 * max(s, 1e-3)
            if a + b * (s + d) ** 2 + c * (s + d) < 0:
                good.append(s)
    if not good:
        return math.inf
    s = min(good)
    return s * s


def _gap_root(f: Front, g: Front, t_now: float) -> float:
    a1, b1, c1 = f.path.coefficients()
    a2, b2, c2 = g.path.coefficients()
    return _roots_sqrt(a2 - a1, b2 - b1, c2 - c1, math.sqrt(t_now))


def _activation_time(fs: FrontSet) -> float:
    b = fs.boundary
    if b is None or b.u <= 0 or not fs.regions:
        return math.inf
    lead = fs.regions[0]
    if isinstance(lead, Fan) and lead.center > 0:
        return lead.center / b.u
    return math.inf


def next_event(fs: FrontSet, horizon: float) -> Event:
    t_now = fs.t
    best = Event(horizon, math.nan, "HorizonReached")
    for i in range(len(fs.fronts) - 1):
        t = _gap_root(fs.fronts[i], fs.fronts[i + 1], t_now)
        if t < best.time:
            kind = "FanEdgeMerge" if any(isinstance(r, Fan) for r in fs.regions[i:i + 3]) else "FrontCollision"
            best = Event(t, fs.fronts[i].position(t), kind, (i, i + 1))
    if fs.fronts:
        a, b, c = fs.fronts[0].path.coefficients()
        t = _roots_sqrt(a, b, c, math.sqrt(t_now))
        if t < best.time:
            best = Event(t, 0.0, "BoundaryExit", (0,))
    t = _activation_time(fs)
    if t_now < t < best.time:
        best = Event(t, 0.0, "BoundaryActivation")
    return best


def _boundary_inflow_waves(fs: FrontSet, t: float) -> None:
    """Create the wave a newly exposed boundary state emits, if any."""
    b = fs.boundary
    if b is None or not fs.regions:
        return
    lead = fs.regions[0]
    if isinstance(lead, Fan):
        if lead.center > 0 and b.u > 0 and -lead.center / t >= -b.u - 1e-12 * max(1.0, b.u):
            region = Constant(b)
            front = make_front(region, lead, t, 0.0, 0.0, fs.new_id())
            fs.fronts.insert(0, front)
            fs.regions.insert(0, region)
        return
    u0 = lead.state.u
    if u0 < b.u and u0 + b.u > 0 or (u0 == b.u > 0 and lead.state.rho != b.rho):
        region = Constant(b)
        front = make_front(region, lead, t, 0.0, 0.0, fs.new_id())
        if front is not None:
            fs.fronts.insert(0, front)
            fs.regions.insert(0, region)
    elif b.u > 0 and b.u < u0:
        raise UnresolvedConfiguration(f"boundary rarefaction would start at t={t}")


def resolve_event(fs: FrontSet, event: Event) -> FrontSet:
    """Advance ``fs`` to the event time and rebuild the fronts there."""
    t = event.time
    fs.t = t
    if event.kind == "HorizonReached":
        return fs
    if event.kind == "BoundaryActivation":
        _boundary_inflow_waves(fs, t)
        return fs
    pos = [f.position(t) for f in fs.fronts]
    scale = max([1.0] + [abs(p) for p in pos])
    # fronts at the boundary leave the domain
    n_exit = 0
    while n_exit < len(pos) and pos[n_exit] <= MERGE_TOL * scale:
        n_exit += 1
    if n_exit:
        mass = sum(f.strength(t) for f in fs.fronts[:n_exit])
        for f in fs.fronts[:n_exit]:
            f.t_end = t
        if mass != 0.0:
            fs.exits.append(ExitRecord(t, mass))
        fs.fronts = fs.fronts[n_exit:]
        fs.regions = fs.regions[n_exit:]
        pos = pos[n_exit:]
    fronts: list[Front] = []
    regions: list[Region] = [fs.regions[0]] if fs.regions else []
    i = 0
    while i < len(fs.fronts):
        j = i
        while j + 1 < len(fs.fronts) and abs(pos[j + 1] - pos[j]) <= MERGE_TOL * scale:
            j += 1
        if j == i:
            fronts.append(fs.fronts[i])
            regions.append(fs.regions[i + 1])
        else:
            group = fs.fronts[i:j + 1]
            e0 = sum(f.strength(t) for f in group)
            for f in group:
                f.t_end = t
            x = sum(pos[i:j + 1]) / (j - i + 1)
            merged = make_front(regions[-1], fs.regions[j + 1], t, x, e0, fs.new_id())
            if merged is not None:
                fronts.append(merged)
                regions.append(fs.regions[j + 1])
        i = j + 1
    fs.fronts, fs.regions = fronts, regions
    if n_exit:
        _boundary_inflow_waves(fs, t)
    return fs


def freeze(front: Front) -> FrontCurve:
    return FrontCurve(front.path, front.t_start, front.t_end, front.atom, front.ident)


def run(fs: FrontSet, horizon: float, case: tuple[int, int] | None = None) -> PiecewiseSolution:
    """Event loop: one slab per inter-event interval."""
    raw_slabs: list[tuple[float, float, list[Front], list[Region]]] = []
    events: list[dict] = []
    n = 0
    while True:
        ev = next_event(fs, horizon)
        t_hi = min(ev.time, horizon)
        if t_hi > fs.t:
            raw_slabs.append((fs.t, t_hi, list(fs.fronts), list(fs.regions)))
        if ev.kind == "HorizonReached" or ev.time >= horizon:
            break
        n += 1
        if n > MAX_EVENTS:
            raise EventCap(f"more than {MAX_EVENTS} events")
        before = [(f.ident, f.strength(ev.time)) for f in fs.fronts]
        resolve_event(fs, ev)
        after = [(f.ident, f.strength(ev.time)) for f in fs.fronts]
        events.append({"t": ev.time, "x": ev.position, "kind": ev.kind,
                       "before": before, "after": after})
    frozen: dict[int, FrontCurve] = {}
    slabs = []
    for t_lo, t_hi, fronts, regions in raw_slabs:
        fc = []
        for f in fronts:
            if id(f) not in frozen:
                frozen[id(f)] = freeze(f)
            fc.append(frozen[id(f)])
        slabs.append(TimeSlab(t_lo, t_hi, tuple(fc), tuple(regions)))
    return PiecewiseSolution(tuple(slabs), horizon, fs.boundary, case, tuple(fs.exits), tuple(events))


def clip_initial(fronts: list[Front], regions: list[Region]) -> tuple[list[Front], list[Region]]:
    """Drop fronts born on x=0 that do not enter the quarter plane."""
    while fronts and fronts[0].position(0.0) <= 0 and fronts[0].path.velocity(1.0) <= 0:
        fronts = fronts[1:]
        regions = regions[1:]
    return fronts, regions
