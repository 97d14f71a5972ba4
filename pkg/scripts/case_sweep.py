"""Random interaction problems: case frequencies, event counts, validation and mass balance."""
from __future__ import annotations

import argparse
from collections import Counter
from dataclasses import dataclass

import numpy as np

from zpgd.core import State, validate
from zpgd.front_tracking import ProblemData, classify_case, evolve
from zpgd.weak_check import mass_balance


@dataclass
class SweepConfig:
    n: int = 2000
    horizon: float = 5.0
    speed: float = 3.0
    seed: int = 11


def run(cfg: SweepConfig) -> Counter:
    rng = np.random.default_rng(cfg.seed)
    labels: Counter = Counter()
    events: Counter = Counter()
    invalid, worst_mass = 0, 0.0
    for _ in range(cfg.n):
        ub, ul, ur = rng.uniform(-cfg.speed, cfg.speed, 3)
        rb, rl, rr = rng.uniform(0.05, 2.0, 3)
        x0 = rng.uniform(0.1, 2.0)
        data = ProblemData(State(ub, rb), State(ul, rl), State(ur, rr), x0, cfg.horizon)
        sol = evolve(data)
        labels[str(classify_case(data))] += 1
        events.update(e["kind"] for e in sol.events)
        invalid += bool(validate(sol))
        x_hi = x0 + 2 * cfg.speed * cfg.horizon + 1
        worst_mass = max(worst_mass, abs(mass_balance(sol, x_hi, 0.01, cfg.horizon)))
    for k, v in sorted(labels.items(), key=lambda kv: [int(s) for s in kv[0].split() if s.isdigit()]):
        print(f"{k:22s} {v}")
    print("events:", dict(events))
    print(f"invalid {invalid} / {cfg.n}, worst mass defect {worst_mass:.1e}")
    return labels


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=SweepConfig.n)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    args = ap.parse_args()
    run(SweepConfig(n=args.n, seed=args.seed))
