import json

import numpy as np
import pytest

from ksground import cli, io
from ksground.radial import RadialGrid, uniform_disk

from . import oracles


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr() if capsys is not None else None
    return code, out


def test_steady_writes_profile_and_sidecar(tmp_path, capsys):
    code, out = run(["steady", "--m", 2, "--mass", 1, "--out", tmp_path], capsys)
    assert code == 0
    meta = json.loads((tmp_path / "steady_m2_M1.json").read_text())
    assert meta["R"] == pytest.approx(oracles.BESSEL_RADIUS, rel=1e-3)
    cols = io.read_csv(tmp_path / "steady_m2_M1.csv")
    assert list(cols) == ["r", "theta", "rho"]


def test_steady_scaling_in_sidecars(tmp_path):
    for M in (1, 16):
        assert run(["steady", "--m", 3, "--mass", M, "--out", tmp_path])[0] == 0
    r1 = io.read_json(tmp_path / "steady_m3_M1.json")["R"]
    r16 = io.read_json(tmp_path / "steady_m3_M16.json")["R"]
    assert r16 / r1 == pytest.approx(2.0, rel=1e-3)


@pytest.mark.parametrize(
    "argv",
    [
        ["steady", "--m", 1.0, "--mass", 1],
        ["steady", "--m", 2, "--mass", -1],
        ["steady", "--m", "abc", "--mass", 1],
        ["evolve", "--m", 2, "--mass", 1, "--init", "wobble"],
        ["evolve", "--m", 2, "--mass", 1, "--init", "scaled:-1"],
        ["verify", "--suite", "nonsense"],
        [],
    ],
)
def test_usage_errors_exit_1(tmp_path, argv, capsys):
    code, out = run(argv + ["--out", tmp_path] if argv and argv[0] != "verify" else argv, capsys)
    assert code == 1
    assert "error" in out.err


def test_energy_disk_matches_closed_forms(tmp_path, capsys):
    g = RadialGrid.covering(2.0, 4096)
    disk = uniform_disk(g, 0.7, 1.3)
    io.write_csv(tmp_path / "disk.csv", ["r", "value"], [g.nodes, disk.values])
    code, out = run(["energy", tmp_path / "disk.csv", "--m", 2, "--support", 1.3], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["H"] == pytest.approx(rep["disk_closed_form"]["H"], rel=1e-6)
    assert rep["W"] == pytest.approx(rep["disk_closed_form"]["W"], rel=1e-6)
    assert rep["W"] == pytest.approx(oracles.disk_interaction(disk.mass, 1.3), rel=1e-6)


def test_energy_steady_profile_passes(tmp_path, capsys):
    run(["steady", "--m", 1.5, "--mass", 1, "--out", tmp_path])
    code, out = run(["energy", tmp_path / "steady_m1.5_M1.csv", "--m", 1.5, "--out", tmp_path / "e.json"], capsys)
    assert code == 0
    assert io.read_json(tmp_path / "e.json")["D_check"] == "PASS"


def test_energy_bad_files_exit_1(tmp_path):
    (tmp_path / "empty.csv").write_text("")
    assert run(["energy", tmp_path / "empty.csv", "--m", 2])[0] == 1
    (tmp_path / "junk.csv").write_text("r,value\n0,1\nx,y\n")
    assert run(["energy", tmp_path / "junk.csv", "--m", 2])[0] == 1
    assert run(["energy", tmp_path / "missing.csv", "--m", 2])[0] == 1


def test_evolve_steady_fixed_point(tmp_path, capsys):
    code, _ = run(["evolve", "--m", 2, "--mass", 1, "--init", "steady", "--out", tmp_path], capsys)
    assert code == 0
    man = io.read_json(tmp_path / "manifest.json")
    assert max(man["sup_distances"]) <= 1e-6
    assert len(man["files"]) == 11
    assert list(io.read_csv(tmp_path / "checkpoint_0010.csv")) == ["r", "M", "rho"]
    assert man["fit_verdict"] == "skipped"


def test_evolve_scaled_monitor_passes(tmp_path, capsys):
    code, out = run(["evolve", "--m", 2, "--mass", 1, "--init", "scaled:0.8", "--T", 20, "--checkpoints", 40, "--out", tmp_path], capsys)
    assert code == 0 and "comparison monitor: PASS" in out.out
    man = io.read_json(tmp_path / "manifest.json")
    assert man["monitor"]["holds"] and man["lambda_fit"] > 0


def test_evolve_scaled_one_is_degenerate(tmp_path):
    assert run(["evolve", "--m", 2, "--mass", 1, "--init", "scaled:1.0", "--out", tmp_path])[0] == 0
    assert max(io.read_json(tmp_path / "manifest.json")["sup_distances"]) <= 1e-6


def test_evolve_from_file(tmp_path):
    g = RadialGrid.covering(3.0, 601)
    disk = uniform_disk(g, 1 / (np.pi * 4), 2.0)
    io.write_csv(tmp_path / "init.csv", ["r", "value"], [g.nodes, disk.values])
    code, _ = run(["evolve", "--m", 2, "--init", f"file:{tmp_path / 'init.csv'}", "--T", 1, "--out", tmp_path / "o"])
    assert code == 0
    # without a support hint the jump is integrated at O(dr)
    loaded = io.read_radial(tmp_path / "init.csv").mass
    assert io.read_json(tmp_path / "o" / "manifest.json")["M"] == pytest.approx(loaded, rel=1e-10)
    assert loaded == pytest.approx(disk.mass, rel=5e-3)


def test_solver_failure_exit_2(monkeypatch, tmp_path, capsys):
    from ksground import steady

    def boom(*a, **k):
        raise steady.SolverError("no bracket")

    monkeypatch.setattr(steady, "solve_steady", boom)
    code, out = run(["steady", "--m", 2, "--mass", 1, "--out", tmp_path], capsys)
    assert code == 2 and "solver failure" in out.err


def test_verify_deterministic_files(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["verify", "--suite", "confinement", "--seed", 7, "--out", a])[0] == 0
    assert run(["verify", "--suite", "confinement", "--seed", 7, "--out", b])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_el_and_loghls_pass(tmp_path, capsys):
    for suite in ("el", "loghls"):
        code, out = run(["verify", "--suite", suite, "--out", tmp_path / f"{suite}.json"], capsys)
        assert code == 0 and "PASS" in out.out
    rep = io.read_json(tmp_path / "loghls.json")
    assert all("margin" in c for c in rep["cases"])


def test_out_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(io.OUT_ENV, str(tmp_path / "env"))
    assert run(["steady", "--m", 2, "--mass", 1])[0] == 0
    assert (tmp_path / "env" / "steady_m2_M1.csv").exists()
