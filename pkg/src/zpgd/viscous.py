"""Vanishing-viscosity approximation through the Hopf-Cole substitution.

``u = -eps p_x / p`` and ``rho = (q/p)_x`` where ``p`` and ``q`` solve heat
equations ``w_t = (eps/2) w_xx`` on the half line with Robin conditions at
``x = 0``.  Two solvers are provided: kernel quadrature for constant boundary
velocity, and Crank-Nicolson finite differences for general data.

Every quantity that can span ``exp(+-1/eps)`` is carried as a
(log-magnitude, sign) pair until the final ratio is formed.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded
from scipy.special import erfcx, log_ndtr

from .io import write_table

LOG2 = math.log(2.0)
SQRT2 = math.sqrt(2.0)
SQRTPI = math.sqrt(math.pi)
QUAD_RTOL = 1e-8
DROP = 42.0  # log-units below a term's peak at which its tail is cut
MAX_TAU_SPLIT = 32
ROW_BLOCK = 3000

_GL16 = leggauss(16)
_GL10 = leggauss(10)


class QuadratureFailure(RuntimeError):
    pass


class NonpositiveP(RuntimeError):
    pass


class SingularSystem(RuntimeError):
    pass


class DynamicRange(RuntimeError):
    """The finite-difference state cannot be held in double precision."""


# ---------------------------------------------------------------- data ----

@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, inf) with value 0 at 0."""

    knots: tuple[float, ...]  # 0 = k0 < k1 < ... < km
    slopes: tuple[float, ...]  # slope on [k_i, k_{i+1}); last one extends to infinity

    def __post_init__(self):
        if len(self.knots) != len(self.slopes) or not self.knots or self.knots[0] != 0.0:
            raise ValueError("knots must start at 0 and match slopes")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")

    @classmethod
    def from_steps(cls, breaks, levels) -> "PiecewiseLinear":
        """Primitive of the step function equal to ``levels[i]`` on ``[breaks[i-1], breaks[i])``."""
        breaks = [float(b) for b in breaks]
        if len(levels) != len(breaks) + 1:
            raise ValueError("need one more level than breaks")
        return cls(tuple([0.0] + breaks), tuple(float(v) for v in levels))

    def _values_at_knots(self) -> np.ndarray:
        k = np.asarray(self.knots)
        s = np.asarray(self.slopes)
        return np.concatenate([[0.0], np.cumsum(s[:-1] * np.diff(k))])

    def pieces(self) -> list[tuple[float, float, float, float]]:
        """(lo, hi, a, b) with f(y) = a + b y on [lo, hi]."""
        vals = self._values_at_knots()
        out = []
        for i, (k, s) in enumerate(zip(self.knots, self.slopes)):
            hi = self.knots[i + 1] if i + 1 < len(self.knots) else math.inf
            out.append((k, hi, vals[i] - s * k, s))
        return out

    def tail(self) -> tuple[float, float, float]:
        """(x_tail, a, b) with f(x) = a + b x for x >= x_tail."""
        lo, _, a, b = self.pieces()[-1]
        return lo, a, b

    def slope_bound(self) -> float:
        return max(abs(s) for s in self.slopes)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        vals = self._values_at_knots()
        k = np.asarray(self.knots)
        i = np.clip(np.searchsorted(k, x, side="right") - 1, 0, len(k) - 1)
        return vals[i] + np.asarray(self.slopes)[i] * (x - k[i])


@dataclass(frozen=True)
class SmoothPrimitive:
    """Primitive given by a callable that is affine beyond ``x_tail``."""

    fn: Callable[[np.ndarray], np.ndarray]
    x_tail: float
    tail_intercept: float
    tail_slope: float
    bound: float  # sup of |derivative|

    def tail(self) -> tuple[float, float, float]:
        return self.x_tail, self.tail_intercept, self.tail_slope

    def slope_bound(self) -> float:
        return self.bound

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


Primitive = PiecewiseLinear | SmoothPrimitive
TimeFunction = float | Callable[[np.ndarray], np.ndarray]


def _as_time_fn(f: TimeFunction) -> Callable[[np.ndarray], np.ndarray]:
    if callable(f):
        return lambda t: np.broadcast_to(np.asarray(f(np.asarray(t, dtype=float)), dtype=float), np.shape(t))
    c = float(f)
    return lambda t: np.full(np.shape(t), c)


@dataclass(frozen=True)
class PrimitiveData:
    U0: Primitive
    R0: Primitive
    uB: TimeFunction
    rhoB: TimeFunction

    @classmethod
    def from_steps(cls, breaks, u_levels, rho_levels, uB: TimeFunction, rhoB: TimeFunction) -> "PrimitiveData":
        return cls(PiecewiseLinear.from_steps(breaks, u_levels), PiecewiseLinear.from_steps(breaks, rho_levels), uB, rhoB)

    @classmethod
    def riemann(cls, u_b: float, rho_b: float, u_l: float, rho_l: float,
                u_r: float, rho_r: float, x0: float = 0.0) -> "PrimitiveData":
        if x0 > 0 and (u_l != u_r or rho_l != rho_r):
            return cls.from_steps([x0], [u_l, u_r], [rho_l, rho_r], u_b, rho_b)
        return cls.from_steps([], [u_r], [rho_r], u_b, rho_b)

    @property
    def constant_uB(self) -> bool:
        return not callable(self.uB)

    def u_sup(self, t_max: float = 1.0) -> float:
        ub = abs(float(self.uB)) if self.constant_uB else float(np.max(np.abs(_as_time_fn(self.uB)(np.linspace(0, t_max, 2001)))))
        return max(self.U0.slope_bound(), ub)


@dataclass(frozen=True)
class Grid:
    x: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if x.ndim != 1 or t.ndim != 1 or len(x) == 0 or len(t) == 0:
            raise ValueError("grid axes must be non-empty 1-d arrays")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        if x[0] < 0 or t[0] <= 0:
            raise ValueError("grid must lie in x >= 0, t > 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @classmethod
    def uniform(cls, x_max: float, nx: int, t_max: float, nt: int, x_min: float | None = None) -> "Grid":
        dx = x_max / nx
        lo = dx if x_min is None else x_min
        return cls(np.linspace(lo, x_max, nx), np.linspace(t_max / nt, t_max, nt))


@dataclass
class PQField:
    """Hopf-Cole potentials on a grid, stored as log p, u = -eps p_x/p and R = q/p."""

    grid: Grid
    epsilon: float
    log_p: np.ndarray
    p_sign: np.ndarray
    u: np.ndarray
    R: np.ndarray
    u_sup: float = math.inf
    method: str = ""
    info: dict = field(default_factory=dict)

    @property
    def p(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.p_sign * np.exp(self.log_p)

    @property
    def q(self) -> np.ndarray:
        return self.R * self.p


@dataclass
class ViscousField:
    grid_x: np.ndarray
    grid_t: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    epsilon: float
    R: np.ndarray | None = None

    def __post_init__(self):
        shape = (len(self.grid_t), len(self.grid_x))
        if self.u.shape != shape or self.rho.shape != shape:
            raise ValueError(f"field shape must be {shape}")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.rho))):
            raise ValueError("field contains non-finite entries")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


# -------------------------------------------------------------- kernel ----

def _log_erfcx(w):
    w = np.asarray(w, dtype=float)
    safe = np.maximum(w, -20.0)
    with np.errstate(divide="ignore"):
        return np.where(w > -20.0, np.log(erfcx(safe)), w * w + LOG2 + log_ndtr(-SQRT2 * w))


def _log_g(s, t, eps):
    return -s * s / (2 * t * eps) - 0.5 * np.log(2 * np.pi * t * eps)


def _log_third(a, t, eps, uB):
    """log |(uB/eps) exp(-a^2/(2 t eps)) erfcx((a - t uB)/sqrt(2 t eps))|."""
    w = (a - t * uB) / np.sqrt(2 * t * eps)
    return math.log(abs(uB) / eps) - a * a / (2 * t * eps) + _log_erfcx(w)


def log_heat_kernel(x, y, t, eps: float, uB: float) -> tuple[np.ndarray, np.ndarray]:
    """(log|K|, sign K) for the Robin heat kernel."""
    x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
    parts = [_log_g(x - y, t, eps), _log_g(x + y, t, eps)]
    signs = [np.ones_like(x), np.ones_like(x)]
    if uB != 0:
        parts.append(_log_third(x + y, t, eps, uB))
        signs.append(np.full_like(x, math.copysign(1.0, uB)))
    return _signed_lse(np.stack(parts), np.stack(signs), 0)


def heat_kernel_K(x, y, t, eps: float, uB: float):
    """Green's function of ``p_t = (eps/2) p_xx`` with ``eps p_x + uB p = 0`` at 0."""
    lk, sk = log_heat_kernel(x, y, t, eps, uB)
    out = sk * np.exp(lk)
    return float(out) if np.ndim(out) == 0 else out


def heat_kernel_Kx(x, y, t, eps: float, uB: float):
    """x-derivative of :func:`heat_kernel_K`."""
    x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
    g1 = np.exp(_log_g(x - y, t, eps))
    g2 = np.exp(_log_g(x + y, t, eps))
    out = -(x - y) / (t * eps) * g1 - (x + y) / (t * eps) * g2
    if uB != 0:
        third = np.sign(uB) * np.exp(_log_third(x + y, t, eps, uB))
        out = out - (uB / eps) * (third + 2 * g2)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------- quadrature ----

class _Term:
    """Log-concave integrand exp(-U0(y)/eps) k_j(x, y, t) on one linear piece of U0.

    j = 0: Gaussian in x - y, j = 1: Gaussian in x + y, j = 2: Robin correction.
    Row parameters are column vectors so that node arrays broadcast.
    """

    def __init__(self, j: int, x, t, eps: float, uB: float, a: float, b: float):
        self.j, self.eps, self.uB, self.a, self.b = j, eps, uB, a, b
        self.x = np.asarray(x, dtype=float)
        self.t = np.asarray(t, dtype=float)
        self.c = 1.0 / np.sqrt(2 * self.t * eps)

    def _cols(self, y):
        if np.ndim(y) == 1:
            return self.x, self.t, self.c
        return self.x[:, None], self.t[:, None], self.c[:, None]

    def logf(self, y):
        x, t, c = self._cols(y)
        base = -(self.a + self.b * y) / self.eps
        if self.j == 0:
            return base + _log_g(x - y, t, self.eps)
        if self.j == 1:
            return base + _log_g(x + y, t, self.eps)
        return base + _log_third(x + y, t, self.eps, self.uB)

    def dlogf(self, y):
        x, t, c = self._cols(y)
        e = self.eps
        if self.j == 0:
            return -self.b / e + (x - y) / (t * e)
        if self.j == 1:
            return -self.b / e - (x + y) / (t * e)
        w = c * (x + y - t * self.uB)
        return -(self.b + self.uB) / e - 2 * c / SQRTPI * np.exp(-_log_erfcx(w))

    def peak(self, lo: float, hi: float) -> np.ndarray:
        x, t, e = self.x, self.t, self.eps
        if self.j == 0:
            y = x - self.b * t
        elif self.j == 1:
            y = -x - self.b * t
        else:
            lam = (self.b + self.uB) / e
            if lam >= 0:
                y = np.full_like(x, lo)
            else:
                target = np.log(2 * self.c / (SQRTPI * -lam))
                w = _solve_log_erfcx(target)
                y = w / self.c - x + t * self.uB
        return np.clip(y, lo, hi)


def _solve_log_erfcx(target: np.ndarray) -> np.ndarray:
    """w with log erfcx(w) = target; erfcx is decreasing."""
    target = np.asarray(target, dtype=float)
    lo = np.full_like(target, -30.0)
    hi = np.full_like(target, 30.0)
    # widen for extreme targets
    while np.any(_log_erfcx(hi) > target):
        hi = np.where(_log_erfcx(hi) > target, hi * 8, hi)
    while np.any(_log_erfcx(lo) < target):
        lo = np.where(_log_erfcx(lo) < target, lo * 2, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = _log_erfcx(mid) > target
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        if np.all(hi - lo <= 1e-14 * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def _walk(term: _Term, start, stop, lpk, hmax, direction: int, max_steps: int = 20000):
    """Panel edges from ``start`` toward ``stop`` until the tail is negligible."""
    edges = [start.copy()]
    e = start.copy()
    active = (e < stop) if direction > 0 else (e > stop)
    steps = 0
    while active.any():
        steps += 1
        if steps > max_steps:
            raise QuadratureFailure("panel walk did not terminate")
        slope = np.abs(term.dlogf(e))
        h = np.minimum(hmax, 1.5 / np.maximum(slope, 1e-300))
        nxt = np.minimum(e + h, stop) if direction > 0 else np.maximum(e - h, stop)
        e = np.where(active, nxt, e)
        edges.append(e.copy())
        with np.errstate(invalid="ignore"):
            still = (e < stop) if direction > 0 else (e > stop)
            active = active & still & (term.logf(e) > lpk - DROP)
    return np.stack(edges, axis=1)


def _panels(term: _Term, lo: float, hi: float):
    n = term.x.shape[0]
    ystar = term.peak(lo, hi)
    lpk = term.logf(ystar)
    hmax = 0.5 * np.sqrt(term.t * term.eps)
    right = _walk(term, ystar, np.full(n, hi), lpk, hmax, +1)
    left = _walk(term, ystar, np.full(n, lo), lpk, hmax, -1)
    edges = np.concatenate([left[:, ::-1], right[:, 1:]], axis=1)
    return edges[:, :-1], edges[:, 1:]


def _rule(a, b, rule):
    xg, wg = rule
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    y = mid[..., None] + hw[..., None] * xg
    with np.errstate(divide="ignore"):
        lw = np.log(hw[..., None] * wg)
    return y, lw


def _signed_lse(logs, signs, axis):
    """(log|sum|, sign) of sum(signs * exp(logs)) along ``axis``.

    Hand-rolled: scipy 1.15 logsumexp returns nan when the largest terms cancel.
    """
    logs = np.asarray(logs, dtype=float)
    signs = np.broadcast_to(signs, logs.shape)
    m = np.max(np.where(signs != 0, logs, -np.inf), axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tot = np.sum(signs * np.exp(logs - m), axis=axis)
        return np.log(np.abs(tot)) + np.squeeze(m, axis=axis), np.sign(tot)


def _moments(term: _Term, lo: float, hi: float):
    """Signed-log moments M0 = int f, Mx = int f (y - x) and their error estimates."""
    a, b = _panels(term, lo, hi)
    n = a.shape[0]
    out = {}
    errs = {}
    for name, rule in (("16", _GL16), ("10", _GL10)):
        y, lw = _rule(a, b, rule)
        y = y.reshape(n, -1)
        lw = lw.reshape(n, -1)
        lf = term.logf(y) + lw
        lf = np.where(np.isfinite(lw), lf, -np.inf)
        d = y - term.x[:, None]
        with np.errstate(divide="ignore"):
            ld = np.log(np.abs(d))
        m0 = _signed_lse(lf, np.ones_like(lf), 1)
        mx = _signed_lse(lf + ld, np.sign(d), 1)
        absx = _signed_lse(lf + ld, np.ones_like(lf), 1)[0]
        out[name] = (m0, mx, absx)
    (m0, mx, absx), (m0b, mxb, _) = out["16"], out["10"]
    with np.errstate(invalid="ignore", over="ignore"):
        e0 = np.abs(1.0 - m0b[1] * np.exp(m0b[0] - m0[0]))
        ex = np.abs(mx[1] * np.exp(mx[0] - absx) - mxb[1] * np.exp(mxb[0] - absx))
    errs["m0"] = np.where(np.isfinite(m0[0]), e0, 0.0)
    errs["mx"] = np.where(np.isfinite(absx), ex, 0.0)
    return m0, mx, absx, errs


def _combine(contribs, what: str, check: bool = True):
    """Signed log-sum of (log|c|, sign, log scale, rel err) contributions."""
    logs = np.stack([c[0] for c in contribs])
    signs = np.stack([c[1] for c in contribs])
    val = _signed_lse(logs, signs, 0)
    if check:
        scales = np.stack([c[2] for c in contribs])
        lerr = np.stack([c[2] + np.log(np.maximum(c[3], 1e-300)) for c in contribs])
        tot = _signed_lse(scales, np.ones_like(scales), 0)[0]
        err = _signed_lse(lerr, np.ones_like(lerr), 0)[0]
        with np.errstate(invalid="ignore"):
            rel = np.exp(err - tot)
        bad = np.isfinite(tot) & (rel > QUAD_RTOL)
        if bad.any():
            raise QuadratureFailure(f"{what}: relative error estimate {rel[bad].max():.3g} exceeds {QUAD_RTOL}")
    return val


def _kernel_integrals(data: PrimitiveData, eps: float, x, t, want_px: bool, want_q: bool):
    """Signed logs of p, p_x and the initial-data part of q at the (x, t) pairs."""
    uB = float(data.uB)
    pieces = data.U0.pieces()
    rpieces = data.R0.pieces() if want_q else None
    if want_q:
        knots_u = [p[0] for p in pieces]
        knots_r = [p[0] for p in rpieces]
        if knots_u != knots_r:
            pieces, rpieces = _common_pieces(data.U0, data.R0)
    terms = (0, 1, 2) if uB != 0 else (0, 1)
    p_parts, px_parts, q_parts = [], [], []
    log_te = np.log(t * eps)
    for k, (lo, hi, A, B) in enumerate(pieces):
        for j in terms:
            term = _Term(j, x, t, eps, uB, A, B)
            (l0, s0), (lx, sx), absx, err = _moments(term, lo, hi)
            sgn = math.copysign(1.0, uB) if j == 2 else 1.0
            p_parts.append((l0, s0 * sgn, l0, err["m0"]))
            if want_px:
                if j == 0:
                    px_parts.append((lx - log_te, sx, absx - log_te, err["mx"]))
                elif j == 1:
                    # -(Mx + 2 x M0)/(t eps) - (2 uB/eps) M0
                    px_parts.append((lx - log_te, -sx, absx - log_te, err["mx"]))
                    with np.errstate(divide="ignore"):
                        c = -(2 * x / (t * eps) + 2 * uB / eps)
                        lc = np.log(np.abs(c))
                    px_parts.append((l0 + lc, s0 * np.sign(c), l0 + lc, err["m0"]))
                else:
                    lc = math.log(abs(uB) / eps)
                    px_parts.append((l0 + lc, -s0, l0 + lc, err["m0"]))
            if want_q:
                _, _, C, D = rpieces[k]
                cx = C + D * x
                with np.errstate(divide="ignore"):
                    lcx = np.log(np.abs(cx))
                q_parts.append((l0 + lcx, s0 * sgn * np.sign(cx), l0 + lcx, err["m0"]))
                if D != 0:
                    ld = math.log(abs(D))
                    q_parts.append((lx + ld, sx * sgn * math.copysign(1.0, D), absx + ld, err["mx"]))
    out = {"p": _combine(p_parts, "p")}
    if want_px:
        out["px"] = _combine(px_parts, "p_x")
    if want_q:
        out["q"] = _combine(q_parts, "q")
    return out


def _common_pieces(U0: PiecewiseLinear, R0: PiecewiseLinear):
    knots = sorted(set(U0.knots) | set(R0.knots))
    up, rp = [], []
    for i, k in enumerate(knots):
        hi = knots[i + 1] if i + 1 < len(knots) else math.inf
        probe = k if not math.isfinite(hi) else 0.5 * (k + hi)
        for f, dst in ((U0, up), (R0, rp)):
            j = max(i for i, kk in enumerate(f.knots) if kk <= probe)
            _, _, a, b = f.pieces()[j]
            dst.append((k, hi, a, b))
    return up, rp


def _blocked(fn, x, t, **kw):
    """Run ``fn`` over row blocks to bound memory."""
    n = x.shape[0]
    if n <= ROW_BLOCK:
        return fn(x=x, t=t, **kw)
    parts = [fn(x=x[i:i + ROW_BLOCK], t=t[i:i + ROW_BLOCK], **kw) for i in range(0, n, ROW_BLOCK)]
    return {k: tuple(np.concatenate([p[k][m] for p in parts]) for m in range(2)) for k in parts[0]}


def _tau_rule(t: float, rule, levels_hi: int = 22, levels_lo: int = 12, split: int = 1):
    """Nodes and weights for int_0^t f(tau) d tau with sqrt substitutions at both ends.

    Each dyadic panel is cut into ``split`` equal pieces.
    """
    vmax = math.sqrt(0.5 * t)
    taus, ws = [], []
    for levels, upper in ((levels_hi, True), (levels_lo, False)):
        edges = np.concatenate([[0.0], vmax * 0.5 ** np.arange(levels, -1, -1)])
        if split > 1:
            edges = np.concatenate([np.linspace(a, b, split + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
                                   + [[vmax]])
        a, b = edges[:-1], edges[1:]
        v, lw = _rule(a, b, rule)
        v = v.ravel()
        w = np.exp(lw.ravel()) * 2 * v
        taus.append(t - v * v if upper else v * v)
        ws.append(w)
    return np.concatenate(taus), np.concatenate(ws)


def _boundary_q_at(data: PrimitiveData, eps: float, x: np.ndarray, t: float, split: int):
    uB = float(data.uB)
    rho_b = _as_time_fn(data.rhoB)
    res = {}
    for name, rule in (("16", _GL16), ("10", _GL10)):
        tau, w = _tau_rule(t, rule, split=split)
        keep = (tau > 0) & (tau < t) & (w > 0)
        tau, w = tau[keep], w[keep]
        lp0 = _blocked(lambda x, t: _kernel_integrals(data, eps, x, t, False, False),
                       np.zeros_like(tau), tau)["p"][0]
        rb = rho_b(tau)
        lk, sk = log_heat_kernel(x[:, None], 0.0, (t - tau)[None, :], eps, uB)
        with np.errstate(divide="ignore"):
            logs = lk + (lp0 + np.log(np.abs(rb)) + np.log(w))[None, :]
        signs = sk * np.sign(rb)[None, :]
        val = _signed_lse(logs, signs, 1)
        scale = _signed_lse(logs, np.ones_like(logs), 1)[0]
        res[name] = (val, scale)
    (v16, s16), (v10, _) = res["16"], res["10"]
    with np.errstate(invalid="ignore", over="ignore"):
        err = np.abs(v16[1] * np.exp(v16[0] - s16) - v10[1] * np.exp(v10[0] - s16))
    return v16, s16, np.where(np.isfinite(s16), err, 0.0)


def _boundary_q(data: PrimitiveData, eps: float, x: np.ndarray, t: float):
    """Signed log of -(eps/2) int_0^t K(x,0,t-tau) p(0,tau) rhoB(tau) d tau, plus error.

    Strong boundary drift puts a narrow interior peak in the integrand, so the
    panels are split until the two rules agree.
    """
    split = 1
    while True:
        v16, s16, err = _boundary_q_at(data, eps, x, t, split)
        if split >= MAX_TAU_SPLIT or not np.any(err > 0.1 * QUAD_RTOL):
            break
        split *= 2
    lc = math.log(eps / 2)
    return (v16[0] + lc, -v16[1], s16 + lc, err)


def solve_pq_explicit(data: PrimitiveData, eps: float, grid: Grid) -> PQField:
    """Kernel representation of (p, q) for constant boundary velocity."""
    if not data.constant_uB:
        raise ValueError("the kernel representation needs a constant boundary velocity")
    if not isinstance(data.U0, PiecewiseLinear) or not isinstance(data.R0, PiecewiseLinear):
        raise ValueError("the kernel representation needs piecewise-linear primitives")
    if not eps > 0:
        raise ValueError("eps must be positive")
    nt, nx = len(grid.t), len(grid.x)
    log_p = np.empty((nt, nx))
    p_sign = np.empty((nt, nx))
    u = np.empty((nt, nx))
    R = np.empty((nt, nx))
    for i, t in enumerate(grid.t):
        tt = np.full(nx, t)
        got = _blocked(lambda x, t: _kernel_integrals(data, eps, x, t, True, True), grid.x, tt)
        lp, sp = got["p"]
        lpx, spx = got["px"]
        lqd, sqd = got["q"]
        qb = _boundary_q(data, eps, grid.x, t)
        qd_scale = lqd
        lq, sq = _combine([(lqd, sqd, qd_scale, np.zeros(nx)), qb], "q boundary term")
        log_p[i], p_sign[i] = lp, sp
        with np.errstate(over="ignore", invalid="ignore"):
            u[i] = -eps * spx * sp * np.exp(lpx - lp)
            R[i] = sq * sp * np.exp(lq - lp)
    return PQField(grid, eps, log_p, p_sign, u, R, data.u_sup(), "explicit")


# ----------------------------------------------------- finite differences --

def _fd_domain(data: PrimitiveData, eps: float, grid: Grid) -> float:
    T = float(grid.t[-1])
    x_tail = max(data.U0.tail()[0], data.R0.tail()[0])
    speed = data.u_sup(T)
    return max(speed * T + x_tail, float(grid.x[-1]) + speed * T) + 10 * math.sqrt(eps * T) + 1.0


def _far_field(data: PrimitiveData, eps: float, X: float, t: float) -> tuple[float, float]:
    """(log p, R) at the truncation point for undisturbed data."""
    _, a, b = data.U0.tail()
    _, ra, rb = data.R0.tail()
    return -(a + b * X - 0.5 * b * b * t) / eps, ra + rb * (X - b * t)


def _cn_matrix(n: int, r: float, robin: float, theta: float) -> np.ndarray:
    """Banded form of I - theta*dt*A with A the Robin Laplacian; r = eps dt/(2 dx^2)."""
    ab = np.zeros((3, n))
    ab[0, 1:] = -theta * r
    ab[1, :] = 1 + 2 * theta * r
    ab[2, :-1] = -theta * r
    ab[0, 1] = -2 * theta * r
    ab[1, 0] = 1 + theta * r * (2 - robin)
    return ab


def _apply_A(v: np.ndarray, r: float, robin: float, right: float) -> np.ndarray:
    """dt * A v for the Robin Laplacian with Dirichlet value ``right`` beyond the last node."""
    out = np.empty_like(v)
    out[1:-1] = r * (v[2:] - 2 * v[1:-1] + v[:-2])
    out[0] = r * (2 * v[1] - (2 - robin) * v[0])
    out[-1] = r * (right - 2 * v[-1] + v[-2])
    return out


def solve_pq_fd(data: PrimitiveData, eps: float, grid: Grid, dt: float, dx: float | None = None,
                rannacher: int = 4) -> PQField:
    """Crank-Nicolson for both heat problems with ghost-point Robin conditions.

    The state is rescaled by a running log-factor every step so that only the
    spread of ``p`` across the domain must fit in double precision.
    """
    if not (eps > 0 and dt > 0):
        raise SingularSystem("eps and dt must be positive")
    if dx is None:
        dx = float(grid.x[1] - grid.x[0]) if len(grid.x) > 1 else dt
    jx = grid.x / dx
    if np.any(np.abs(jx - np.round(jx)) > 1e-6):
        raise ValueError("grid x must lie on multiples of dx")
    nsteps = grid.t / dt
    if np.any(np.abs(nsteps - np.round(nsteps)) > 1e-6):
        raise ValueError("grid t must lie on multiples of dt")
    jx = np.round(jx).astype(int)
    out_steps = np.round(nsteps).astype(int)
    X = _fd_domain(data, eps, grid)
    N = int(math.ceil(X / dx))
    X = N * dx
    xs = dx * np.arange(N)  # unknowns; node N carries the Dirichlet value
    ub = _as_time_fn(data.uB)
    rb = _as_time_fn(data.rhoB)

    U0 = np.asarray(data.U0(xs), dtype=float)
    lp = -U0 / eps
    scale = float(lp.max())
    if float(scale - lp.min()) > 700:
        raise DynamicRange(f"exp(-U0/eps) spans e^{scale - lp.min():.0f}")
    P = np.exp(lp - scale)
    Q = np.asarray(data.R0(xs), dtype=float) * P
    r_full = eps * dt / (2 * dx * dx)
    nt_out = len(grid.t)
    log_p = np.empty((nt_out, len(jx)))
    u = np.empty_like(log_p)
    R = np.empty_like(log_p)
    k_out = 0
    t = 0.0
    step = 0
    sub_total = 2 * min(rannacher, 2 * out_steps[-1]) // 2 if rannacher else 0
    schedule = [(0.5 * dt, 1.0)] * sub_total + [(dt, 0.5)] * (out_steps[-1] - sub_total // 2)
    done_full = 0.0
    for h, theta in schedule:
        r = eps * h / (2 * dx * dx)
        t_new = t + h
        ub0, ub1 = float(ub(np.array(t))), float(ub(np.array(t_new)))
        rb0, rb1 = float(rb(np.array(t))), float(rb(np.array(t_new)))
        robin0, robin1 = 2 * dx * ub0 / eps, 2 * dx * ub1 / eps
        lpf0, rf0 = _far_field(data, eps, X, t)
        lpf1, rf1 = _far_field(data, eps, X, t_new)
        pf0, pf1 = math.exp(lpf0 - scale), math.exp(lpf1 - scale)
        ab = _cn_matrix(N, r, robin1, theta)
        rhs_p = P + (1 - theta) * _apply_A(P, r, robin0, pf0)
        rhs_p[-1] += theta * r * pf1
        try:
            P1 = solve_banded((1, 1), ab, rhs_p)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        # boundary flux term of the q problem: -2 dx p(0) rhoB inside the ghost value
        rhs_q = Q + (1 - theta) * _apply_A(Q, r, robin0, rf0 * pf0)
        rhs_q[0] -= (1 - theta) * r * 2 * dx * P[0] * rb0
        rhs_q[0] -= theta * r * 2 * dx * P1[0] * rb1
        rhs_q[-1] += theta * r * rf1 * pf1
        Q1 = solve_banded((1, 1), ab, rhs_q)
        m = float(np.max(np.abs(P1)))
        if not (m > 0 and math.isfinite(m)):
            raise NonpositiveP("finite-difference p lost positivity or overflowed")
        P, Q = P1 / m, Q1 / m
        scale += math.log(m)
        t = t_new
        done_full += h / dt
        step = int(round(done_full))
        while k_out < nt_out and abs(done_full - out_steps[k_out]) < 1e-9:
            if np.any(P <= 0):
                raise NonpositiveP(f"p <= 0 at t = {t}")
            lpn = np.log(P)
            dlp = _diff4(np.append(lpn, lpf1 - scale), dx)[:-1]
            un = -eps * dlp
            un[0] = ub1
            log_p[k_out] = lpn[jx] + scale
            u[k_out] = un[jx]
            R[k_out] = (Q / P)[jx]
            k_out += 1
    if k_out != nt_out:
        raise RuntimeError("output times were not reached")
    return PQField(grid, eps, log_p, np.ones_like(log_p), u, R, data.u_sup(float(grid.t[-1])), "fd",
                   {"x_max": X, "dx": dx, "dt": dt, "steps": step})


# ------------------------------------------------------------ back to u, rho

def _diff4(f: np.ndarray, h: float | np.ndarray) -> np.ndarray:
    """First derivative along the last axis, fourth order on a uniform spacing."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    if np.ndim(h) != 0:
        x = np.asarray(h, dtype=float)
        d = np.diff(x)
        if n >= 5 and np.allclose(d, d[0], rtol=1e-9, atol=0):
            return _diff4(f, float(d[0]))
        return np.gradient(f, x, axis=-1, edge_order=2)
    if n < 5:
        return np.gradient(f, h, axis=-1, edge_order=min(2, n - 1) or 1)
    out = np.empty_like(f)
    out[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
    out[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / (12 * h)
    out[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / (12 * h)
    out[..., -1] = (25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]) / (12 * h)
    out[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / (12 * h)
    return out


def viscous_fields(pq: PQField, eps: float | None = None, grid: Grid | None = None,
                   check_bound: bool = True) -> ViscousField:
    """Recover (u, rho) from the potentials; rho is a difference quotient of R = q/p."""
    eps = pq.epsilon if eps is None else eps
    grid = pq.grid if grid is None else grid
    if np.any(pq.p_sign <= 0) or not np.all(np.isfinite(pq.log_p)):
        raise NonpositiveP("p is not positive on the whole grid")
    rho = _diff4(pq.R, grid.x)
    if check_bound and math.isfinite(pq.u_sup):
        over = float(np.max(np.abs(pq.u))) - pq.u_sup
        if over > 1e-6:
            raise ValueError(f"maximum principle violated by {over:.3g}")
    return ViscousField(grid.x, grid.t, pq.u, rho, eps, pq.R)


# --------------------------------------------------------------- mollifier

def _eta(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    with np.errstate(divide="ignore", over="ignore"):
        v = np.where(inside, np.exp(-1.0 / np.where(inside, 1 - s * s, 1.0)), 0.0)
    return v / _eta_norm()


@cache
def _eta_norm() -> float:
    xg, wg = leggauss(64)
    a = np.linspace(-1, 1, 33)
    tot = 0.0
    for lo, hi in zip(a[:-1], a[1:]):
        s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg
        tot += 0.5 * (hi - lo) * float(np.sum(wg * np.exp(-1.0 / (1 - s * s))))
    return tot


def _eta_moments(z):
    """Phi(z) = int_{-1}^z eta and Psi(z) = int_{-1}^z Phi."""
    z = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
    xg, wg = leggauss(24)
    panels = 16
    edges = -1 + (z[..., None] + 1) * np.linspace(0, 1, panels + 1)
    lo, hi = edges[..., :-1], edges[..., 1:]
    s = 0.5 * (lo + hi)[..., None] + 0.5 * (hi - lo)[..., None] * xg
    w = 0.5 * (hi - lo)[..., None] * wg
    e = _eta(s)
    phi = np.sum(w * e, axis=(-1, -2))
    first = np.sum(w * s * e, axis=(-1, -2))
    return phi, z * phi - first


def _ramp_primitive(x, a: float, eps: float):
    """int_0^x (1_[a, inf) * eta_eps)(s) ds."""
    z = (np.asarray(x, dtype=float) - a) / eps
    _, psi = _eta_moments(z)
    lin = np.where(z >= 1, z, psi)
    lin = np.where(z <= -1, 0.0, lin)
    base = _eta_moments(np.array(-a / eps))[1] if -a / eps > -1 else 0.0
    return eps * (lin - base)


def _ramp_value(x, a: float, eps: float):
    z = (np.asarray(x, dtype=float) - a) / eps
    phi, _ = _eta_moments(z)
    return np.where(z >= 1, 1.0, np.where(z <= -1, 0.0, phi))


def _mollified_primitive(breaks, levels, eps: float) -> SmoothPrimitive:
    """Primitive of (f * chi_[2 eps, inf)) * eta_eps for a step function f."""
    edges = [2 * eps] + [b for b in breaks if b > 2 * eps]
    vals = [levels[sum(1 for b in breaks if b <= 2 * eps)]] + [levels[i + 1] for i, b in enumerate(breaks) if b > 2 * eps]
    # f chi = sum_i (vals[i] - vals[i-1]) 1_[edge_i, inf)
    jumps = [vals[0]] + [vals[i] - vals[i - 1] for i in range(1, len(vals))]

    def fn(x):
        return sum(j * _ramp_primitive(x, a, eps) for j, a in zip(jumps, edges))

    x_tail = edges[-1] + eps
    intercept = -sum(j * a for j, a in zip(jumps, edges))
    slope = float(sum(jumps))
    return SmoothPrimitive(fn, x_tail, intercept, slope, max(abs(v) for v in vals))


def mollified_density(breaks, levels, eps: float):
    """The mollified step function itself (derivative of the primitive)."""
    edges = [2 * eps] + [b for b in breaks if b > 2 * eps]
    vals = [levels[sum(1 for b in breaks if b <= 2 * eps)]] + [levels[i + 1] for i, b in enumerate(breaks) if b > 2 * eps]
    jumps = [vals[0]] + [vals[i] - vals[i - 1] for i in range(1, len(vals))]
    return lambda x: sum(j * _ramp_value(x, a, eps) for j, a in zip(jumps, edges))


def mollify_data(breaks, u_levels, rho_levels, uB: float, rhoB: float, eps: float) -> PrimitiveData:
    """Cut off near the corner, convolve with the Friedrichs mollifier at scale eps, integrate.

    Boundary data are treated the same way in t; both boundary densities are
    mollified from the boundary density itself.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    U0 = _mollified_primitive(list(breaks), list(u_levels), eps)
    R0 = _mollified_primitive(list(breaks), list(rho_levels), eps)
    ub_fn = mollified_density([], [uB], eps)
    rb_fn = mollified_density([], [rhoB], eps)
    return PrimitiveData(U0, R0, ub_fn, rb_fn)


# ---------------------------------------------------------------- export

def export_field(field: ViscousField, path) -> None:
    rows = ((float(x), float(t), float(field.u[i, j]), float(field.rho[i, j]))
            for i, t in enumerate(field.grid_t) for j, x in enumerate(field.grid_x))
    write_table(path, ["x", "t", "u", "rho"], rows)
