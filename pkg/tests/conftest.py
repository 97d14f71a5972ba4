import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zpgd.core import State  # noqa: E402
from zpgd.front_tracking import ProblemData  # noqa: E402

_RESULTS: dict[int, tuple[bool, str]] = {}


def random_problem(rng: np.random.Generator, horizon: float = 5.0) -> ProblemData:
    u = rng.uniform(-3, 3, 3)
    rho = 2.0 - rng.uniform(0, 2, 3)  # (0, 2]
    x0 = 2.0 - rng.uniform(0, 2)
    return ProblemData(State(u[0], rho[0]), State(u[1], rho[1]), State(u[2], rho[2]), x0, horizon)


@pytest.fixture
def record():
    def _record(n: int, ok: bool, detail: str) -> None:
        _RESULTS[n] = (ok, detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
