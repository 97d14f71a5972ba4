"""Serialization of solutions, event logs and numeric tables."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import (
    Constant,
    DeltaAtom,
    ExitRecord,
    Fan,
    FrontCurve,
    Line,
    PiecewiseSolution,
    SqrtCurve,
    State,
    TimeSlab,
)


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _unnum(x) -> float:
    return float(x)


def _front_to_dict(f: FrontCurve) -> dict:
    if isinstance(f.path, Line):
        path = {"kind": "line", "speed": f.path.speed, "intercept": f.path.intercept}
    else:
        path = {"kind": "sqrt", "center": f.path.center, "u_const": f.path.u_const, "coeff": f.path.coeff}
    out = {"id": f.ident, "path": path, "t_start": _num(f.t_start), "t_end": _num(f.t_end)}
    if f.atom is not None:
        out["atom"] = {"alpha": f.atom.alpha, "beta": f.atom.beta, "gamma": f.atom.gamma,
                       "degenerate": f.atom.degenerate}
    return out


def _front_from_dict(d: dict) -> FrontCurve:
    p = d["path"]
    path = Line(p["speed"], p["intercept"]) if p["kind"] == "line" else SqrtCurve(p["center"], p["u_const"], p["coeff"])
    atom = None
    if "atom" in d:
        a = d["atom"]
        atom = DeltaAtom(a["alpha"], a["beta"], a["gamma"], a.get("degenerate", False))
    return FrontCurve(path, _unnum(d["t_start"]), _unnum(d["t_end"]), atom, d["id"])


def _region_to_dict(r) -> dict:
    if isinstance(r, Fan):
        return {"kind": "fan", "center": r.center}
    return {"kind": "constant", "u": r.state.u, "rho": r.state.rho}


def _region_from_dict(d: dict):
    if d["kind"] == "fan":
        return Fan(d["center"])
    return Constant(State(d["u"], d["rho"]))


def solution_to_dict(sol: PiecewiseSolution) -> dict:
    return {
        "horizon": sol.horizon,
        "boundary": None if sol.boundary is None else {"u": sol.boundary.u, "rho": sol.boundary.rho},
        "case": None if sol.case is None else list(sol.case),
        "exits": [{"t": e.time, "mass": e.mass} for e in sol.exits],
        "slabs": [
            {
                "t_lo": s.t_lo,
                "t_hi": s.t_hi,
                "fronts": [_front_to_dict(f) for f in s.fronts],
                "regions": [_region_to_dict(r) for r in s.regions],
            }
            for s in sol.slabs
        ],
    }


def solution_from_dict(d: dict) -> PiecewiseSolution:
    cache: dict[str, FrontCurve] = {}
    slabs = []
    for s in d["slabs"]:
        fronts = []
        for fd in s["fronts"]:
            key = json.dumps(fd, sort_keys=True)
            fronts.append(cache.setdefault(key, _front_from_dict(fd)))
        slabs.append(TimeSlab(s["t_lo"], s["t_hi"], tuple(fronts), tuple(_region_from_dict(r) for r in s["regions"])))
    b = d.get("boundary")
    return PiecewiseSolution(
        tuple(slabs),
        d["horizon"],
        None if b is None else State(b["u"], b["rho"]),
        None if d.get("case") is None else tuple(d["case"]),
        tuple(ExitRecord(e["t"], e["mass"]) for e in d.get("exits", [])),
    )


def dump_solution(sol: PiecewiseSolution, path: str | Path) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(sol), indent=1) + "\n")


def load_solution(path: str | Path) -> PiecewiseSolution:
    return solution_from_dict(json.loads(Path(path).read_text()))


def dump_events(sol: PiecewiseSolution, path: str | Path) -> None:
    with open(path, "w") as fh:
        for ev in sol.events:
            fh.write(json.dumps(ev) + "\n")


def load_events(path: str | Path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_table(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(rows[0]))
