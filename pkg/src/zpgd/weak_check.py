"""Residual checks against test functions, mass balance and viscous/exact comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import simpson, trapezoid

from .core import Constant, DeltaAtom, Fan, Line, PiecewiseSolution, TimeSlab, evaluate
from .viscous import Grid, PrimitiveData, ViscousField, _diff4, solve_pq_explicit, solve_pq_fd, viscous_fields

N_TIME_SAMPLES = 64
_GL = leggauss(24)


class SupportClipped(ValueError):
    pass


class EmptyComparison(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """exp(1 - 1/(1 - r^2)) with r = (x - center)/width; unit maximum at the center."""

    __test__ = False  # not a pytest class

    center: float
    width: float

    def __post_init__(self):
        if not (self.width > 0 and self.center - self.width > 0):
            raise ValueError("support must lie strictly inside (0, inf)")

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def derivatives(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """phi and its first three x-derivatives."""
        x = np.asarray(x, dtype=float)
        r = (x - self.center) / self.width
        inside = np.abs(r) < 1
        rr = np.where(inside, r, 0.0)
        D = 1 - rr * rr
        phi = np.where(inside, np.exp(1 - 1 / D), 0.0)
        g1 = -2 * rr / D**2
        g2 = -2 / D**2 - 8 * rr * rr / D**3
        g3 = -24 * rr / D**3 - 48 * rr**3 / D**4
        w = self.width
        d1 = g1 * phi / w
        d2 = (g2 + g1 * g1) * phi / w**2
        d3 = (g3 + 3 * g1 * g2 + g1**3) * phi / w**3
        z = np.zeros_like(phi)
        return phi, np.where(inside, d1, z), np.where(inside, d2, z), np.where(inside, d3, z)

    def __call__(self, x):
        return self.derivatives(x)[0]


@dataclass
class ResidualReport:
    eps_values: list[float]
    residual_u: list[float]
    residual_rho: list[float]
    distance: list[float] = field(default_factory=list)
    fitted_order: float = math.nan
    residual_order: float = math.nan
    order_skipped: bool = False
    atom_mass: list[float] = field(default_factory=list)
    atom_exact: float = math.nan

    def __post_init__(self):
        if not (len(self.eps_values) == len(self.residual_u) == len(self.residual_rho)):
            raise ValueError("report columns must be aligned")
        if any(v < 0 for v in self.residual_u + self.residual_rho):
            raise ValueError("residuals are magnitudes")

    def rows(self) -> list[tuple]:
        dist = self.distance or [math.nan] * len(self.eps_values)
        return [(e, ru, rr, d, self.fitted_order)
                for e, ru, rr, d in zip(self.eps_values, self.residual_u, self.residual_rho, dist)]


def fit_order(eps_values, values) -> float:
    """Least-squares slope of log(value) against log(eps)."""
    e = np.log(np.asarray(eps_values, dtype=float))
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return math.nan
    return float(np.polyfit(e, np.log(v), 1)[0])


# ------------------------------------------------------- viscous residual

def _sample_times(grid_t: np.ndarray, T: float, n: int = N_TIME_SAMPLES) -> np.ndarray:
    idx = np.nonzero(grid_t <= T * (1 + 1e-12))[0]
    if len(idx) == 0:
        raise ValueError("no grid time at or below T")
    if len(idx) <= n:
        return idx
    targets = np.linspace(grid_t[idx[0]], grid_t[idx[-1]], n)
    return np.unique(idx[np.clip(np.searchsorted(grid_t[idx], targets), 0, len(idx) - 1)])


def _check_support(x: np.ndarray, lo: float, hi: float) -> None:
    if lo < x[0] or hi > x[-1]:
        raise SupportClipped(f"support [{lo}, {hi}] leaves the grid [{x[0]}, {x[-1]}]")


def residual_forms(fld: ViscousField, phi: TestFunction, T: float) -> dict[str, np.ndarray]:
    """Per-time residuals in direct form and with derivatives moved onto phi."""
    x, t = fld.grid_x, fld.grid_t
    _check_support(x, *phi.support)
    if T > t[-1] * (1 + 1e-12):
        raise ValueError("T exceeds the field's time range")
    ph, _, d2, d3 = phi.derivatives(x)
    ux = _diff4(fld.u, x)
    ut = np.gradient(fld.u, t, axis=0, edge_order=2)
    rt = np.gradient(fld.rho, t, axis=0, edge_order=2)
    flux = _diff4(fld.rho * fld.u, x)
    idx = _sample_times(t, T)
    out = {"t": t[idx]}
    out["direct_u"] = simpson((ut + fld.u * ux)[idx] * ph, x=x, axis=1)
    out["direct_rho"] = simpson((rt + flux)[idx] * ph, x=x, axis=1)
    e = fld.epsilon
    out["moved_u"] = 0.5 * e * simpson(fld.u[idx] * d2, x=x, axis=1)
    if fld.R is not None:
        out["moved_rho"] = -0.5 * e * simpson(fld.R[idx] * d3, x=x, axis=1)
    else:
        out["moved_rho"] = 0.5 * e * simpson(fld.rho[idx] * d2, x=x, axis=1)
    return out


def interior_residual_viscous(fld: ViscousField, phi: TestFunction, T: float) -> tuple[float, float]:
    """Sup over sampled times of the direct-form residuals against ``phi``."""
    f = residual_forms(fld, phi, T)
    return float(np.max(np.abs(f["direct_u"]))), float(np.max(np.abs(f["direct_rho"])))


# --------------------------------------------------------- exact residual

def _region_pde(region, x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (u_t + u u_x, rho_t + (rho u)_x) inside a region."""
    if isinstance(region, Fan):
        u = (x - region.center) / t
        return -u / t + u * (1 / t), np.zeros_like(x)
    return np.zeros_like(x), np.zeros_like(x)


def exact_residual_at(sol: PiecewiseSolution, phi: TestFunction, t: float) -> tuple[float, float]:
    """Signed distributional residuals of a piecewise solution at time ``t``."""
    slab = sol.slab_at(t)
    pos = slab.positions(t)
    edges = [0.0] + list(pos) + [math.inf]
    lo_s, hi_s = phi.support
    xg, wg = _GL
    ru = rr = 0.0
    for k, region in enumerate(slab.regions):
        a, b = max(edges[k], lo_s), min(edges[k + 1], hi_s)
        if b <= a:
            continue
        xs = 0.5 * (a + b) + 0.5 * (b - a) * xg
        pu, pr = _region_pde(region, xs, t)
        w = 0.5 * (b - a) * wg * phi(xs)
        ru += float(np.sum(w * pu))
        rr += float(np.sum(w * pr))
    for i, f in enumerate(slab.fronts):
        s = pos[i]
        ph = float(phi(s))
        if ph == 0.0:
            continue
        (ul, rl), (ur, rrr) = slab.regions[i].value(s, t), slab.regions[i + 1].value(s, t)
        sp = f.path.velocity(t)
        ru += (ur - ul) * (0.5 * (ur + ul) - sp) * ph
        defect = (rrr * ur - rl * ul) - sp * (rrr - rl)
        e_rate = f.atom.rate(t) if f.atom is not None else 0.0
        rr += (e_rate + defect) * ph
    return ru, rr


def interior_residual_exact(sol: PiecewiseSolution, phi: TestFunction, t_window) -> tuple[float, float]:
    """Sup of |residual| over a uniform sample of the time window (or at one time)."""
    if np.ndim(t_window) == 0:
        ts = [float(t_window)]
    else:
        a, b = t_window
        ts = np.linspace(a, b, N_TIME_SAMPLES)
    vals = np.array([exact_residual_at(sol, phi, t) for t in ts])
    return float(np.max(np.abs(vals[:, 0]))), float(np.max(np.abs(vals[:, 1])))


def corrupt_speed(sol: PiecewiseSolution, front_ident: int, delta: float) -> PiecewiseSolution:
    """Copy of ``sol`` whose straight front ``front_ident`` moves ``delta`` faster."""
    new_slabs = []
    for slab in sol.slabs:
        fronts = []
        for f in slab.fronts:
            if f.ident == front_ident:
                if not isinstance(f.path, Line):
                    raise ValueError("only straight fronts can be corrupted")
                t0 = f.t_start
                x0 = f.path.position(t0)
                f = replace(f, path=Line(f.path.speed + delta, x0 - (f.path.speed + delta) * t0))
            fronts.append(f)
        new_slabs.append(replace(slab, fronts=tuple(fronts)))
    return replace(sol, slabs=tuple(new_slabs))


# ---------------------------------------------------------- data residual

def data_residual(fld: ViscousField, data, psi: TestFunction, boundary_psi: TestFunction | None = None
                  ) -> tuple[float, float, float, float]:
    """Initial and boundary residuals on the first time line and first space line.

    ``data`` supplies ``u0(x)``, ``rho0(x)``, ``uB(t)`` and ``rhoB(t)`` callables.
    ``boundary_psi`` defaults to ``psi`` and is integrated over the time axis.
    """
    bpsi = psi if boundary_psi is None else boundary_psi
    x, t = fld.grid_x, fld.grid_t
    _check_support(x, *psi.support)
    _check_support(t, *bpsi.support)
    px = psi(x)
    pt = bpsi(t)
    r1 = simpson((fld.u[0] - data.u0(x)) * px, x=x)
    r2 = simpson((fld.rho[0] - data.rho0(x)) * px, x=x)
    r3 = simpson((fld.u[:, 0] - data.uB(t)) * pt, x=t)
    r4 = simpson((fld.rho[:, 0] - data.rhoB(t)) * pt, x=t)
    return float(r1), float(r2), float(r3), float(r4)


@dataclass(frozen=True)
class StepData:
    """Raw piecewise-constant data as callables."""

    breaks: tuple[float, ...]
    u_levels: tuple[float, ...]
    rho_levels: tuple[float, ...]
    u_b: float
    rho_b: float

    def _step(self, levels, x):
        i = np.searchsorted(np.asarray(self.breaks, dtype=float), np.asarray(x, dtype=float), side="right")
        return np.asarray(levels, dtype=float)[i]

    def u0(self, x):
        return self._step(self.u_levels, x)

    def rho0(self, x):
        return self._step(self.rho_levels, x)

    def uB(self, t):
        return np.full(np.shape(t), float(self.u_b))

    def rhoB(self, t):
        return np.full(np.shape(t), float(self.rho_b))


# ------------------------------------------------------------- comparison

@dataclass
class ErrorReport:
    sup: float
    l1: float
    n_points: int
    atoms: list[tuple[float, float, float, float]] = field(default_factory=list)  # (t, x, estimate, exact)


def _excluded(slab: TimeSlab, t: float, x: np.ndarray, radius: float, boundary: bool) -> np.ndarray:
    pos = list(slab.positions(t)) + ([0.0] if boundary else [])
    mask = np.ones_like(x, dtype=bool)
    for p in pos:
        mask &= np.abs(x - p) > radius
    return mask


def _exact_u(sol: PiecewiseSolution, x: np.ndarray, t: float) -> np.ndarray:
    return np.array([evaluate(sol, float(xx), t).u for xx in x])


def _regular_mass(slab: TimeSlab, t: float, a: float, b: float) -> float:
    pos = slab.positions(t)
    edges = [0.0] + list(pos) + [math.inf]
    tot = 0.0
    for k, region in enumerate(slab.regions):
        lo, hi = max(a, edges[k]), min(b, edges[k + 1])
        if hi > lo and isinstance(region, Constant):
            tot += region.state.rho * (hi - lo)
    return tot


def compare(exact: PiecewiseSolution, fld: ViscousField, exclusion_radius: float,
            exclude_boundary: bool = True, atom_window: float | None = None) -> ErrorReport:
    """Distances between a viscous field and the exact solution away from fronts.

    The boundary layer at ``x = 0`` is excluded like a front unless
    ``exclude_boundary`` is False.  Atom masses are estimated from windows of
    half-width ``atom_window`` (default ``10 eps``) around each atom.
    """
    x = fld.grid_x
    sup, l1, n = 0.0, 0.0, 0
    atoms = []
    dx = np.gradient(x) if len(x) > 1 else np.ones(1)
    w = 10 * fld.epsilon if atom_window is None else atom_window
    for i, t in enumerate(fld.grid_t):
        if t > exact.horizon:
            continue
        slab = exact.slab_at(float(t))
        mask = _excluded(slab, float(t), x, exclusion_radius, exclude_boundary)
        if mask.any():
            diff = np.abs(fld.u[i, mask] - _exact_u(exact, x[mask], float(t)))
            sup = max(sup, float(diff.max()))
            l1 += float(np.sum(diff * dx[mask]))
            n += int(mask.sum())
        for f, s in zip(slab.fronts, slab.positions(float(t))):
            if f.atom is None:
                continue
            half = min(w, s - x[0], x[-1] - s)
            if half <= 0:
                continue
            a, b = s - half, s + half
            if fld.R is not None:
                Ra, Rb = np.interp([a, b], x, fld.R[i])
                est = Rb - Ra
            else:
                sel = (x >= a) & (x <= b)
                est = float(trapezoid(fld.rho[i, sel], x[sel]))
            est -= _regular_mass(slab, float(t), a, b)
            atoms.append((float(t), float(s), float(est), f.atom.strength(float(t))))
    if n == 0:
        raise EmptyComparison("exclusion removed every grid point")
    return ErrorReport(sup, l1 / max(1, len(fld.grid_t)), n, atoms)


# ------------------------------------------------------------ mass balance

def _sqrt_roots(a: float, b: float, c: float, s_lo: float, s_hi: float) -> list[float]:
    """Times t in (s_lo^2, s_hi^2) with a + b t + c sqrt(t) = 0."""
    if b == 0 and c == 0:
        return []
    roots = np.roots([b, c, a]) if b != 0 else np.array([-a / c])
    out = []
    for s in np.atleast_1d(roots):
        if abs(s.imag) < 1e-12 and s_lo < s.real < s_hi:
            out.append(float(s.real) ** 2)
    return sorted(out)


def _window_mass(sol: PiecewiseSolution, x_max: float, t: float) -> float:
    slab = sol.slab_at(t)
    m = _regular_mass(slab, t, 0.0, x_max)
    for f, s in zip(slab.fronts, slab.positions(t)):
        if f.atom is not None and 0 < s < x_max:
            m += f.atom.strength(t)
    return m


def _flux(region, x: float, t: float) -> float:
    if isinstance(region, Fan):
        return 0.0
    return region.state.rho * region.state.u


def mass_balance(sol: PiecewiseSolution, x_max: float, t_a: float, t_b: float,
                 include_exits: bool = True) -> float:
    """Conservation defect of the density on [0, x_max] x [t_a, t_b]."""
    if not (0 < t_a < t_b <= sol.horizon):
        raise ValueError("need 0 < t_a < t_b <= horizon")
    inflow = 0.0
    for slab in sol.slabs:
        lo, hi = max(slab.t_lo, t_a), min(slab.t_hi, t_b)
        if hi <= lo:
            continue
        # left edge: the leftmost region touches x = 0+
        inflow += _flux(slab.regions[0], 0.0, 0.5 * (lo + hi)) * (hi - lo)
        # right edge: split at front crossings of x_max
        cuts = [lo, hi]
        for f in slab.fronts:
            a, b, c = f.path.coefficients()
            for tc in _sqrt_roots(a - x_max, b, c, math.sqrt(lo), math.sqrt(hi)):
                cuts.append(tc)
                if f.atom is not None:
                    inflow -= math.copysign(1.0, f.path.velocity(tc)) * f.atom.strength(tc)
        cuts = sorted(set(cuts))
        for t0, t1 in zip(cuts[:-1], cuts[1:]):
            tm = 0.5 * (t0 + t1)
            pos = slab.positions(tm)
            k = int(np.searchsorted(pos, x_max))
            inflow -= _flux(slab.regions[k], x_max, tm) * (t1 - t0)
    if include_exits:
        for ex in sol.exits:
            if t_a < ex.time <= t_b:
                inflow -= ex.mass
    return _window_mass(sol, x_max, t_b) - _window_mass(sol, x_max, t_a) - inflow


# ------------------------------------------------------ convergence table

def viscous_run(data: PrimitiveData, eps: float, grid: Grid, method: str = "fd", dt: float | None = None,
                dx: float | None = None) -> ViscousField:
    if method == "explicit":
        pq = solve_pq_explicit(data, eps, grid)
    else:
        pq = solve_pq_fd(data, eps, grid, dt if dt is not None else float(grid.t[0]), dx=dx)
    return viscous_fields(pq)


def convergence_table(exact: PiecewiseSolution, data: PrimitiveData, eps_list, phis, T: float = 1.0,
                      x_max: float = 4.0, dx: float = 2e-3, dt: float = 2e-3,
                      exclusion_radius: float = 0.2) -> ResidualReport:
    """Viscous residuals and distance to the exact solution along an eps ladder."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing with at least 3 entries")
    nt = int(round(T / dt))
    nx = int(round(x_max / dx))
    grid = Grid(dx * np.arange(1, nx + 1), dt * np.arange(1, nt + 1))
    res_u, res_r, dist, atom = [], [], [], []
    for eps in eps_list:
        fld = viscous_run(data, eps, grid, "fd", dt=dt, dx=dx)
        ru = max(interior_residual_viscous(fld, phi, T)[0] for phi in phis) if phis else 0.0
        rr = max(interior_residual_viscous(fld, phi, T)[1] for phi in phis) if phis else 0.0
        res_u.append(ru)
        res_r.append(rr)
        last = ViscousField(grid.x, grid.t[-1:], fld.u[-1:], fld.rho[-1:], eps, fld.R[-1:])
        rep = compare(exact, last, exclusion_radius)
        dist.append(rep.sup)
        if rep.atoms:
            atom.append(rep.atoms[0][2])
    skipped = max(dist) < 1e-12 and max(res_u + res_r) < 1e-10
    report = ResidualReport(eps_list, res_u, res_r, dist,
                            math.nan if skipped else fit_order(eps_list, dist),
                            math.nan if skipped else fit_order(eps_list, res_u),
                            skipped, atom)
    return report
