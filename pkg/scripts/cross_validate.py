"""Kernel quadrature against Crank-Nicolson on random interaction data."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from zpgd.viscous import Grid, PrimitiveData, solve_pq_explicit, solve_pq_fd, viscous_fields


@dataclass
class CrossConfig:
    n: int = 10
    h: float = 1e-3
    x_max: float = 3.0
    times: tuple[float, ...] = (0.5, 1.0)
    eps_range: tuple[float, float] = (0.1, 0.3)
    seed: int = 707


def run(cfg: CrossConfig) -> float:
    rng = np.random.default_rng(cfg.seed)
    grid = Grid(cfg.h * np.arange(10, int(round(cfg.x_max / cfg.h)) + 1), np.array(cfg.times))
    worst = 0.0
    for k in range(cfg.n):
        ub, ul, ur = rng.uniform(-1, 1, 3)
        rb, rl, rr = rng.uniform(0.1, 2.0, 3)
        x0 = float(np.round(rng.uniform(0.25, 1.0), 3))
        eps = rng.uniform(*cfg.eps_range)
        data = PrimitiveData.riemann(ub, rb, ul, rl, ur, rr, x0)
        t0 = time.perf_counter()
        a = solve_pq_explicit(data, eps, grid)
        t1 = time.perf_counter()
        b = solve_pq_fd(data, eps, grid, cfg.h, dx=cfg.h)
        t2 = time.perf_counter()
        fa, fb = viscous_fields(a), viscous_fields(b)
        d = [float(np.max(np.abs(va - vb)) / np.max(np.abs(va))) for va, vb in ((a.p, b.p), (a.q, b.q), (fa.u, fb.u))]
        worst = max(worst, *d)
        print(f"{k:2d} eps={eps:.3f} x0={x0:.3f}  p {d[0]:.1e}  q {d[1]:.1e}  u {d[2]:.1e}  "
              f"explicit {t1 - t0:.2f}s  fd {t2 - t1:.2f}s")
    print(f"worst relative sup difference {worst:.2e}")
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=CrossConfig.n)
    ap.add_argument("--h", type=float, default=CrossConfig.h)
    args = ap.parse_args()
    run(CrossConfig(n=args.n, h=args.h))
