import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fixtures.subcases import FIXTURES
from zpgd.core import State, atoms_at, evaluate, validate
from zpgd.front_tracking import ProblemData, classify_case, evolve, initial_fronts, next_event

speeds = st.floats(-3, 3)
dens = st.floats(0.01, 2)


def problem(f, horizon=None):
    return ProblemData(State(f.u_b, f.rho_b), State(f.u_L, f.rho_L), State(f.u_R, f.rho_R), f.x0,
                       horizon or f.horizon)


@pytest.mark.parametrize("fx", FIXTURES, ids=lambda f: f.name)
def test_golden_fixture(fx):
    sol = evolve(problem(fx))
    assert sol.case == fx.case
    assert validate(sol) == []
    rng = np.random.default_rng(7)
    for t in fx.horizon * rng.uniform(0.01, 1.0, 15):
        for x in rng.uniform(0.01, max(fx.fronts(t) + [fx.x0]) + 1.0, 10):
            if any(abs(x - y) < 1e-9 for y in fx.fronts(t)):
                continue
            s = evaluate(sol, x, t)
            assert (s.u, s.rho_regular) == pytest.approx(fx.value(x, t), abs=1e-10)
        got, want = np.array(sorted(atoms_at(sol, t))), np.array(sorted(fx.atoms(t)))
        assert got.shape == want.shape
        assert np.allclose(got, want, rtol=0, atol=1e-10)


def test_problem_validation():
    with pytest.raises(ValueError):
        ProblemData(State(1, 1), State(0, 1), State(0, 1), 0.0, 1.0)
    with pytest.raises(ValueError):
        ProblemData(State(1, 1), State(0, 1), State(0, 1), 1.0, -1.0)


def test_classify_interacting_shocks():
    assert str(classify_case(ProblemData(State(3, 1), State(1, 1), State(0, 1), 1.0, 2.0))) == "Case 6 Subcase 10"


def test_shock_merge_event_log():
    sol = evolve(ProblemData(State(3, 1), State(1, 1), State(0, 1), 1.0, 2.0))
    kinds = [e["kind"] for e in sol.events]
    assert kinds == ["FrontCollision"]
    assert sol.events[0]["t"] == pytest.approx(2 / 3)


def test_exit_is_recorded_with_mass():
    # a delta shock moving left leaves through x = 0
    sol = evolve(ProblemData(State(-0.5, 1.5), State(-1.0, 1.0), State(-1.5, 0.5), 1.0, 2.0))
    [ex] = sol.exits
    assert ex.time == pytest.approx(0.8)
    assert ex.mass == pytest.approx(0.5 * 0.5 * 1.5 * 0.8)
    assert atoms_at(sol, 1.5) == []


def test_boundary_activation_after_fan_reaches_boundary():
    # the fan trace -x0/t rises above -u_b at t = x0/u_b = 2 and the boundary emits a shock
    sol = evolve(ProblemData(State(0.5, 1.5), State(-1.0, 1.0), State(0.5, 0.5), 1.0, 4.0))
    assert "BoundaryActivation" in [e["kind"] for e in sol.events]
    assert validate(sol) == []


def test_next_event_on_initial_fronts():
    data = ProblemData(State(3, 1), State(1, 1), State(0, 1), 1.0, 2.0)
    ev = next_event(initial_fronts(data), 0.0, data.horizon)
    assert ev.kind == "FrontCollision"
    assert ev.position == pytest.approx(4 / 3)


def test_evolve_deterministic():
    data = ProblemData(State(1.0, 1.5), State(0.5, 1.0), State(1.5, 0.5), 1.0, 6.0)
    assert evolve(data) == evolve(data)


@given(speeds, dens, speeds, dens, speeds, dens, st.floats(0.05, 2))
@settings(max_examples=300, deadline=None)
def test_random_problems_validate(ub, rb, ul, rl, ur, rr, x0):
    sol = evolve(ProblemData(State(ub, rb), State(ul, rl), State(ur, rr), x0, 5.0))
    assert validate(sol) == []
    for f in sol.fronts():
        if f.atom is not None:
            assert f.strength(min(f.t_end, 5.0)) > 0
