import json

import numpy as np
import pytest

from ksground import io
from ksground.potential import Density2D
from ksground.radial import RadialGrid, uniform_disk
from ksground.suites import random_bumps, case_rng


def test_csv_round_trip_is_exact(tmp_path):
    x = np.array([0.0, 1 / 3, np.pi, 1e-300, 6.02e23])
    io.write_csv(tmp_path / "a.csv", ["r", "value"], [x, 2 * x])
    back = io.read_csv(tmp_path / "a.csv")
    assert np.array_equal(back["r"], x) and np.array_equal(back["value"], 2 * x)


@pytest.mark.parametrize(
    "text", ["", "r,value\n", "r,value\n0,1\n0.1,abc\n", "r,value\n0,1,2\n", "r,value\n0,nan\n0.1,1\n0.2,1\n"]
)
def test_malformed_csv_rejected(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(io.FormatError):
        io.read_csv(p)


def test_missing_file_is_format_error(tmp_path):
    with pytest.raises(io.FormatError):
        io.read_csv(tmp_path / "nope.csv")


def test_json_is_sorted_and_rounded():
    text = io.dumps({"b": 0.1 + 0.2, "a": [np.float64(1.0) / 3, np.int64(2), np.bool_(True)], "c": float("nan")})
    data = json.loads(text)
    assert list(data) == ["a", "b", "c"]
    assert data["b"] == 0.3 and data["a"] == [0.333333333333, 2, True] and data["c"] is None


def test_profile_round_trip(tmp_path, steady_m3):
    csv_path, side = io.write_profile(tmp_path / "s.csv", steady_m3)
    meta = io.read_json(side)
    assert set(meta) == {"m", "M", "R", "theta_c", "D", "residual"}
    rho = io.read_radial(csv_path)
    assert rho.support == pytest.approx(steady_m3.R, rel=1e-11)
    assert rho.edge_exponent == pytest.approx(0.5)
    assert rho.mass == pytest.approx(steady_m3.M, rel=1e-6)


def test_read_radial_rejects_bad_columns(tmp_path):
    io.write_csv(tmp_path / "x.csv", ["x", "value"], [[0, 1, 2], [1, 1, 0]])
    with pytest.raises(io.FormatError):
        io.read_radial(tmp_path / "x.csv")
    io.write_csv(tmp_path / "y.csv", ["r", "value"], [[0, 1, 2.5], [1, 1, 0]])
    with pytest.raises(io.FormatError):
        io.read_radial(tmp_path / "y.csv")
    io.write_csv(tmp_path / "z.csv", ["r", "value"], [[0, 1, 2], [1, -1, 0]])
    with pytest.raises(io.FormatError):
        io.read_radial(tmp_path / "z.csv")


def test_radial_value_column(tmp_path):
    g = RadialGrid.covering(2.0, 201)
    disk = uniform_disk(g, 0.5, 1.0)
    io.write_csv(tmp_path / "d.csv", ["r", "value"], [g.nodes, disk.values])
    back = io.read_radial(tmp_path / "d.csv", support=1.0)
    assert back.mass == pytest.approx(disk.mass, rel=1e-12)


@pytest.mark.parametrize("writer", ["csv", "bin"])
def test_2d_round_trip(tmp_path, writer):
    rho2 = random_bumps(case_rng(1, 0), n=32)
    path = tmp_path / f"g.{writer}"
    (io.write_2d_csv if writer == "csv" else io.write_2d_binary)(path, rho2)
    back = io.read_2d(path)
    assert back.h == pytest.approx(rho2.h, rel=1e-12)
    assert np.array_equal(back.values, rho2.values)


def test_truncated_binary_rejected(tmp_path):
    rho2 = random_bumps(case_rng(1, 0), n=16)
    p = io.write_2d_binary(tmp_path / "g.bin", rho2)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(io.FormatError):
        io.read_2d(p)


def test_default_out_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv(io.OUT_ENV, str(tmp_path))
    assert io.default_out_dir() == tmp_path
