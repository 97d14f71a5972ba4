"""Distance between viscous and exact boundary Riemann solutions along an eps ladder.

Writes one row per (case, radius, eps) and prints fitted slopes.  The atom
estimate for the inflow shock is reported against its exact strength.

    python scripts/convergence_study.py --out conv.csv
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from zpgd.core import State
from zpgd.io import write_table
from zpgd.riemann import BoundaryRiemannData, solve_boundary_riemann
from zpgd.viscous import Grid, PrimitiveData, solve_pq_explicit, viscous_fields
from zpgd.weak_check import compare, fit_order

CASES = {1: (1, 2, 1, 1), 2: (-1, 1, -2, 1), 3: (0.5, 1, 1.5, 1), 4: (-0.5, 1, 1, 1), 5: (1, 1, -0.5, 1)}


@dataclass
class StudyConfig:
    eps_ladder: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025, 0.0125)
    radii: tuple[float, ...] = (0.2, 0.5)
    t: float = 1.0
    x_max: float = 3.0
    nx: int = 1200
    cases: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])


def run(cfg: StudyConfig) -> list[tuple]:
    grid = Grid(np.linspace(cfg.x_max / cfg.nx, cfg.x_max, cfg.nx), np.array([cfg.t]))
    rows = []
    for case in cfg.cases:
        ub, rb, u0, r0 = CASES[case]
        exact = solve_boundary_riemann(BoundaryRiemannData(State(ub, rb), State(u0, r0)), 2 * cfg.t)
        data = PrimitiveData.riemann(ub, rb, u0, r0, u0, r0)
        fields = {eps: viscous_fields(solve_pq_explicit(data, eps, grid)) for eps in cfg.eps_ladder}
        for radius in cfg.radii:
            dist = []
            for eps, fld in fields.items():
                rep = compare(exact, fld, radius)
                atom = rep.atoms[0][2] if rep.atoms else float("nan")
                exact_atom = rep.atoms[0][3] if rep.atoms else float("nan")
                dist.append(rep.sup)
                rows.append((case, radius, eps, rep.sup, atom, exact_atom))
            tail = fit_order(cfg.eps_ladder[-3:], dist[-3:])
            print(f"case {case} radius {radius}: sup {['%.2e' % d for d in dist]}  "
                  f"order(all) {fit_order(cfg.eps_ladder, dist):.2f}  order(last 3) {tail:.2f}")
        if rows[-1][4] == rows[-1][4]:
            print(f"case {case}: atom at eps={cfg.eps_ladder[-1]}: {rows[-1][4]:.4f} vs {rows[-1][5]:.4f}")
    return rows


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="convergence_study.csv")
    ap.add_argument("--nx", type=int, default=StudyConfig.nx)
    args = ap.parse_args()
    rows = run(StudyConfig(nx=args.nx))
    write_table(args.out, ["case", "radius", "eps", "sup", "atom_estimate", "atom_exact"], rows)


if __name__ == "__main__":
    main()
