"""Command-line front end.

    zpgd <mode> --config <path> [--out <prefix>]
    zpgd batch <directory> [--out <directory>]

Config files hold flat ``key = value`` lines; lists are comma-separated.
Exit status: 0 success, 2 invalid configuration, 3 solver failure.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .core import OutOfHorizon, PiecewiseSolution, State, atoms_at, evaluate, validate
from .front_tracking import ProblemData, classify_case, evolve
from .rankine_hugoniot import InvalidAnchor, NegativeStrength
from .riemann import (
    BoundaryRiemannData,
    InteriorRiemannData,
    admissible_set_contains,
    boundary_case,
    boundary_trace,
    solve_boundary_riemann,
    solve_interior_riemann,
)
from .tracking import EventCap, UnresolvedConfiguration
from .viscous import (
    DynamicRange,
    Grid,
    NonpositiveP,
    PrimitiveData,
    QuadratureFailure,
    SingularSystem,
    export_field,
    solve_pq_explicit,
    solve_pq_fd,
    viscous_fields,
)
from .weak_check import EmptyComparison, TestFunction, compare, convergence_table, interior_residual_exact, mass_balance

MODES = ("riemann", "boundary-riemann", "interact", "viscous", "check", "converge")
THREADS_ENV = "ZPGD_THREADS"

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
SOLVER_ERRORS = (UnresolvedConfiguration, EventCap, QuadratureFailure, NonpositiveP, SingularSystem,
                 DynamicRange, EmptyComparison, OutOfHorizon, InvalidAnchor, NegativeStrength)

_REQUIRED = {
    "riemann": ("u_L", "rho_L", "u_R", "rho_R", "horizon"),
    "boundary-riemann": ("u_b", "rho_b", "u_L", "rho_L", "horizon"),
    "interact": ("u_b", "rho_b", "u_L", "rho_L", "u_R", "rho_R", "x0", "horizon"),
    "check": ("u_b", "rho_b", "u_L", "rho_L", "u_R", "rho_R", "x0", "horizon"),
    "viscous": ("u_b", "rho_b", "u_L", "rho_L", "u_R", "rho_R", "x0", "horizon", "epsilon",
                "grid_nx", "grid_nt", "x_max"),
    "converge": ("u_b", "rho_b", "u_L", "rho_L", "u_R", "rho_R", "x0", "horizon", "epsilon_list",
                 "grid_nx", "grid_nt", "x_max"),
}
_FLOATS = ("u_b", "rho_b", "u_L", "rho_L", "u_R", "rho_R", "x0", "horizon", "epsilon", "x_max", "dt")
_INTS = ("grid_nx", "grid_nt")
_LISTS = ("epsilon_list", "profile_times")


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    mode: str
    values: dict = field(default_factory=dict)
    out: str = "zpgd_out"

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def get(self, key, default=None):
        return self.values.get(key, default)


def read_config(path: str | Path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        parser.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return dict(parser["scenario"])


def parse_scenario(raw: dict[str, str], mode: str | None = None, out: str | None = None) -> Scenario:
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    vals: dict = {}
    for k, v in raw.items():
        if k in ("mode", "out", "method"):
            continue
        try:
            if k in _FLOATS:
                vals[k] = float(v)
            elif k in _INTS:
                vals[k] = int(v)
            elif k in _LISTS:
                vals[k] = [float(s) for s in v.split(",") if s.strip()]
            else:
                raise ConfigError(f"unknown key {k!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"field {k!r} is not numeric: {v!r}") from exc
    for k in _REQUIRED[mode]:
        if k not in vals:
            raise ConfigError(f"missing required field {k!r} for mode {mode}")
    for k, v in vals.items():
        seq = v if isinstance(v, list) else [v]
        if not all(math.isfinite(s) for s in seq):
            raise ConfigError(f"field {k!r} must be finite")
    if vals["horizon"] <= 0:
        raise ConfigError("field 'horizon' must be positive")
    for k in ("rho_b", "rho_L", "rho_R"):
        if vals.get(k, 0.0) < 0:
            raise ConfigError(f"field {k!r} must be non-negative")
    if mode in ("interact", "check", "viscous", "converge") and vals["x0"] < 0:
        raise ConfigError("field 'x0' must be non-negative")
    if mode in ("interact", "check") and vals["x0"] == 0:
        raise ConfigError("field 'x0' must be positive for interaction problems")
    if mode == "viscous" and vals["epsilon"] <= 0:
        raise ConfigError("field 'epsilon' must be positive")
    if mode == "converge":
        el = vals["epsilon_list"]
        if len(el) < 3 or any(e <= 0 for e in el) or any(b >= a for a, b in zip(el, el[1:])):
            raise ConfigError("field 'epsilon_list' must hold >= 3 decreasing positive values")
    method = raw.get("method", "explicit")
    if method not in ("explicit", "fd"):
        raise ConfigError("field 'method' must be explicit or fd")
    vals["method"] = method
    return Scenario(mode, vals, out or raw.get("out", "zpgd_out"))


# ------------------------------------------------------------- solving

def exact_solution(sc: Scenario) -> PiecewiseSolution:
    v = sc.values
    if sc.mode == "riemann":
        return solve_interior_riemann(InteriorRiemannData(State(v["u_L"], v["rho_L"]), State(v["u_R"], v["rho_R"]),
                                                          v.get("x0", 0.0)), v["horizon"])
    if sc.mode == "boundary-riemann":
        return solve_boundary_riemann(BoundaryRiemannData(State(v["u_b"], v["rho_b"]),
                                                          State(v["u_L"], v["rho_L"])), v["horizon"])
    if v["x0"] == 0:
        # data collapse to a boundary Riemann problem with the right state
        return solve_boundary_riemann(BoundaryRiemannData(State(v["u_b"], v["rho_b"]),
                                                          State(v["u_R"], v["rho_R"])), v["horizon"])
    return evolve(ProblemData(State(v["u_b"], v["rho_b"]), State(v["u_L"], v["rho_L"]),
                              State(v["u_R"], v["rho_R"]), v["x0"], v["horizon"]))


def case_label(sc: Scenario) -> str:
    v = sc.values
    if sc.mode == "riemann":
        ul, ur = v["u_L"], v["u_R"]
        return "interior " + ("contact" if ul == ur else "rarefaction" if ul < ur else "delta shock")
    if sc.mode == "boundary-riemann" or v.get("x0", 1.0) == 0:
        u0 = v["u_L"] if sc.mode == "boundary-riemann" else v["u_R"]
        return f"Boundary Case {boundary_case(v['u_b'], u0)}"
    data = ProblemData(State(v["u_b"], v["rho_b"]), State(v["u_L"], v["rho_L"]), State(v["u_R"], v["rho_R"]),
                       v["x0"], v["horizon"])
    return str(classify_case(data))


def primitive_data(sc: Scenario) -> PrimitiveData:
    v = sc.values
    return PrimitiveData.riemann(v["u_b"], v["rho_b"], v["u_L"], v["rho_L"], v["u_R"], v["rho_R"], v["x0"])


def profile_times(sc: Scenario) -> list[float]:
    h = sc.values["horizon"]
    return sc.values.get("profile_times") or [0.25 * h, 0.75 * h]


def _x_extent(sol: PiecewiseSolution, sc: Scenario) -> float:
    if "x_max" in sc.values:
        return sc.values["x_max"]
    t = sol.horizon
    pos = [abs(p) for p in sol.slab_at(t).positions(t)] if sol.slab_at(t).fronts else [0.0]
    return max(pos + [sc.values.get("x0", 0.0)]) + 1.0


def write_profiles(sol: PiecewiseSolution, sc: Scenario, prefix: str) -> list[str]:
    n = int(sc.values.get("grid_nx", 400))
    xs = np.linspace(0, _x_extent(sol, sc), n + 1)[1:]
    rows, arows = [], []
    for t in profile_times(sc):
        for x in xs:
            s = evaluate(sol, float(x), t)
            rows.append((float(x), float(t), s.u, s.rho_regular))
        for x, e in atoms_at(sol, t):
            arows.append((float(t), float(x), float(e)))
    io.write_table(prefix + ".profile.csv", ["x", "t", "u", "rho"], rows)
    io.write_table(prefix + ".atoms.csv", ["t", "x", "e"], arows)
    return [prefix + ".profile.csv", prefix + ".atoms.csv"]


def write_plot_script(prefix: str, table: str, times: list[float], what: str = "profile") -> str:
    name = Path(table).name
    lines = [
        "# gnuplot script; run from the output directory",
        "set datafile separator ','",
        "set terminal pngcairo size 900,700",
        f"set output '{Path(prefix).name}.{what}.png'",
        "set multiplot layout 2,1",
        "set xlabel 'x'",
    ]
    for col, label in ((3, "u"), (4, "rho")):
        parts = [f"'{name}' using 1:(abs($2-{io.fmt(t)})<1e-12 ? ${col} : 1/0) with lines title 't={t:g}'"
                 for t in times]
        lines += [f"set ylabel '{label}'", "plot " + ", \\\n     ".join(parts)]
    lines.append("unset multiplot")
    path = prefix + ".plot.gp"
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def _run_exact(sc: Scenario, prefix: str) -> list[str]:
    sol = exact_solution(sc)
    viol = validate(sol)
    if viol:
        raise UnresolvedConfiguration(f"constructed solution fails validation: {viol[0]}")
    io.dump_solution(sol, prefix + ".solution.json")
    io.dump_events(sol, prefix + ".events.jsonl")
    Path(prefix + ".case.txt").write_text(case_label(sc) + "\n")
    files = [prefix + ".solution.json", prefix + ".events.jsonl", prefix + ".case.txt"]
    files += write_profiles(sol, sc, prefix)
    files.append(write_plot_script(prefix, prefix + ".profile.csv", profile_times(sc)))
    return files


def _viscous_grid(sc: Scenario) -> Grid:
    v = sc.values
    nx, nt = v["grid_nx"], v["grid_nt"]
    dx = v["x_max"] / nx
    return Grid(dx * np.arange(1, nx + 1), v["horizon"] / nt * np.arange(1, nt + 1))


def _run_viscous(sc: Scenario, prefix: str) -> list[str]:
    grid = _viscous_grid(sc)
    data = primitive_data(sc)
    eps = sc.values["epsilon"]
    if sc.values["method"] == "fd":
        dt = sc.values.get("dt", float(grid.t[0]))
        pq = solve_pq_fd(data, eps, grid, dt, dx=float(grid.x[0]))
    else:
        pq = solve_pq_explicit(data, eps, grid)
    fld = viscous_fields(pq)
    export_field(fld, prefix + ".field.csv")
    files = [prefix + ".field.csv"]
    try:
        sol = exact_solution(sc)
        rep = compare(sol, fld, 0.2)
        rows = [("sup", rep.sup), ("l1", rep.l1), ("points", float(rep.n_points))]
        rows += [(f"atom_t{t:g}", est) for t, _, est, _ in rep.atoms]
        io.write_table(prefix + ".compare.csv", ["metric", "value"], rows)
        files.append(prefix + ".compare.csv")
    except EmptyComparison:
        pass
    files.append(write_plot_script(prefix, prefix + ".field.csv", [float(t) for t in grid.t[-1:]], "field"))
    return files


def _run_check(sc: Scenario, prefix: str) -> tuple[list[str], bool]:
    sol = exact_solution(sc)
    rows = []
    viol = validate(sol)
    rows.append(("validate", float(len(viol)), 0.0, not viol))
    ub = sc.values["u_b"]
    x_hi = _x_extent(sol, sc)
    worst = 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.uniform(0.1, 0.5 * x_hi)
        c = rng.uniform(w + 1e-3, x_hi)
        phi = TestFunction(c, w)
        worst = max(worst, *interior_residual_exact(sol, phi, (1e-3 * sol.horizon, sol.horizon)))
    rows.append(("residual_exact", worst, 1e-10, worst < 1e-10))
    mb = max(abs(mass_balance(sol, x_hi, 0.01 * sol.horizon, sol.horizon)), 0.0)
    rows.append(("mass_balance", mb, 1e-8, mb < 1e-8))
    bad = 0
    for t in np.linspace(0.01, 1, 50) * sol.horizon:
        u, rho = boundary_trace(sol, float(t))
        if not admissible_set_contains(ub, u) or (u > 0 and rho != sc.values["rho_b"]):
            bad += 1
    rows.append(("boundary_admissible", float(bad), 0.0, bad == 0))
    io.write_table(prefix + ".check.csv", ["check", "value", "tolerance", "pass"],
                   [(n, v, tol, "yes" if ok else "no") for n, v, tol, ok in rows])
    return [prefix + ".check.csv"], all(r[3] for r in rows)


def _run_converge(sc: Scenario, prefix: str) -> list[str]:
    v = sc.values
    sol = exact_solution(sc)
    grid = _viscous_grid(sc)
    x_hi = float(grid.x[-1])
    phis = [TestFunction(0.5 * x_hi, 0.45 * x_hi)]
    dt = v.get("dt", float(grid.t[0]))
    rep = convergence_table(sol, primitive_data(sc), v["epsilon_list"], phis, T=v["horizon"],
                            x_max=x_hi, dx=float(grid.x[0]), dt=dt)
    io.write_table(prefix + ".convergence.csv", ["eps", "residual_u", "residual_rho", "distance", "order"],
                   rep.rows())
    return [prefix + ".convergence.csv"]


def run_scenario(sc: Scenario) -> tuple[int, list[str]]:
    prefix = sc.out
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    try:
        if sc.mode in ("riemann", "boundary-riemann", "interact"):
            return EXIT_OK, _run_exact(sc, prefix)
        if sc.mode == "viscous":
            return EXIT_OK, _run_viscous(sc, prefix)
        if sc.mode == "check":
            files, ok = _run_check(sc, prefix)
            if not ok:
                print(f"zpgd: check failed, see {files[0]}", file=sys.stderr)
                return EXIT_SOLVER, files
            return EXIT_OK, files
        return EXIT_OK, _run_converge(sc, prefix)
    except SOLVER_ERRORS as exc:
        print(f"zpgd: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER, []


def run_file(mode: str | None, config: str | Path, out: str | None) -> int:
    try:
        sc = parse_scenario(read_config(config), mode, out)
    except ConfigError as exc:
        print(f"zpgd: invalid config {config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_scenario(sc)[0]


def run_batch(directory: str | Path, out_dir: str | Path | None = None) -> int:
    files = sorted(Path(directory).glob("*.cfg"))
    out = Path(out_dir) if out_dir else Path(directory)
    workers = int(os.environ.get(THREADS_ENV, "0")) or (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(lambda f: run_file(None, f, str(out / f.stem)), files))
    return max(codes, default=EXIT_OK)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="zpgd", description="Exact and viscous solutions of pressureless gas dynamics in x > 0.")
    ap.add_argument("mode", choices=MODES + ("batch",))
    ap.add_argument("target", nargs="?", help="scenario directory (batch mode)")
    ap.add_argument("--config", help="scenario file")
    ap.add_argument("--out", help="output prefix (directory in batch mode)")
    args = ap.parse_args(argv)
    if args.mode == "batch":
        if not args.target:
            print("zpgd: batch mode needs a directory", file=sys.stderr)
            return EXIT_CONFIG
        return run_batch(args.target, args.out)
    if not args.config:
        print("zpgd: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    return run_file(args.mode, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
