import hashlib
import json
from pathlib import Path

import pytest

from zpgd import cli, io

SUB10 = """\
mode = interact
u_b = 3      # boundary state
rho_b = 1
u_L = 1
rho_L = 1
u_R = 0
rho_R = 1
x0 = 1
horizon = 2
profile_times = 0.5, 1.5
"""


def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_interact_outputs(tmp_path):
    cfg = write(tmp_path, SUB10)
    out = str(tmp_path / "o")
    assert cli.main(["interact", "--config", str(cfg), "--out", out]) == 0
    assert Path(out + ".case.txt").read_text().strip() == "Case 6 Subcase 10"
    ev = [json.loads(line) for line in Path(out + ".events.jsonl").read_text().splitlines()]
    assert [e["kind"] for e in ev] == ["FrontCollision"]
    header, prof = io.read_table(out + ".profile.csv")
    assert header == ["x", "t", "u", "rho"]
    assert sorted(set(prof[:, 1])) == [0.5, 1.5]
    header, atoms = io.read_table(out + ".atoms.csv")
    assert header == ["t", "x", "e"]
    for suffix in (".solution.json", ".plot.gp"):
        assert Path(out + suffix).exists()


def test_outputs_are_deterministic(tmp_path):
    cfg = write(tmp_path, SUB10)
    digests = []
    for k in range(2):
        out = str(tmp_path / f"run{k}")
        assert cli.main(["interact", "--config", str(cfg), "--out", out]) == 0
        digests.append([hashlib.md5(Path(out + s).read_bytes()).hexdigest()
                        for s in (".solution.json", ".events.jsonl", ".profile.csv", ".atoms.csv")])
    assert digests[0] == digests[1]


@pytest.mark.parametrize("text,field", [
    (SUB10.replace("x0 = 1\n", ""), "x0"),
    (SUB10.replace("horizon = 2", "horizon = -1"), "horizon"),
    (SUB10.replace("rho_L = 1", "rho_L = abc"), "rho_L"),
    (SUB10 + "colour = red\n", "colour"),
    (SUB10.replace("rho_R = 1", "rho_R = -2"), "rho_R"),
])
def test_bad_config_exits_2(tmp_path, capsys, text, field):
    cfg = write(tmp_path, text)
    assert cli.main(["interact", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert field in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert cli.main(["interact", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert cli.main(["interact"]) == 2


def test_solver_error_exits_3(tmp_path, capsys):
    text = SUB10.replace("mode = interact", "mode = viscous").replace("u_b = 3", "u_b = 3\nmethod = fd")
    text += "epsilon = 1e-4\ngrid_nx = 20\ngrid_nt = 4\nx_max = 4\n"
    cfg = write(tmp_path, text)
    assert cli.main(["viscous", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "solver error" in capsys.readouterr().err


def test_check_mode(tmp_path):
    cfg = write(tmp_path, SUB10)
    out = str(tmp_path / "c")
    assert cli.main(["check", "--config", str(cfg), "--out", out]) == 0
    rows = Path(out + ".check.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["validate", "residual_exact", "mass_balance", "boundary_admissible"]
    assert all(r.endswith("yes") for r in rows)


def test_viscous_mode(tmp_path):
    text = SUB10 + "epsilon = 0.1\ngrid_nx = 60\ngrid_nt = 4\nx_max = 3\n"
    cfg = write(tmp_path, text)
    out = str(tmp_path / "v")
    assert cli.main(["viscous", "--config", str(cfg), "--out", out]) == 0
    header, fld = io.read_table(out + ".field.csv")
    assert header == ["x", "t", "u", "rho"] and fld.shape == (240, 4)
    assert Path(out + ".compare.csv").exists()


def test_riemann_modes(tmp_path):
    cfg = write(tmp_path, "u_L = 0\nrho_L = 1\nu_R = 2\nrho_R = 1\nhorizon = 1\n")
    out = str(tmp_path / "r")
    assert cli.main(["riemann", "--config", str(cfg), "--out", out]) == 0
    assert Path(out + ".case.txt").read_text().strip() == "interior rarefaction"
    cfg = write(tmp_path, "u_b = 1\nrho_b = 1\nu_L = -0.5\nrho_L = 1\nhorizon = 1\n", "b.cfg")
    assert cli.main(["boundary-riemann", "--config", str(cfg), "--out", out]) == 0
    assert Path(out + ".case.txt").read_text().strip() == "Boundary Case 5"


def test_batch(tmp_path, monkeypatch):
    d = tmp_path / "in"
    d.mkdir()
    write(d, SUB10, "a.cfg")
    write(d, SUB10.replace("u_b = 3", "u_b = 0.5"), "b.cfg")
    monkeypatch.setenv("ZPGD_THREADS", "2")
    assert cli.main(["batch", str(d), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "a.case.txt").exists() and (tmp_path / "out" / "b.case.txt").exists()
    write(d, "mode = interact\n", "c.cfg")
    assert cli.main(["batch", str(d), "--out", str(tmp_path / "out")]) == 2
    assert cli.main(["batch"]) == 2
