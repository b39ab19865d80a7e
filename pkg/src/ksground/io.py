"""File formats: radial CSV profiles, 2D grids (CSV or binary), JSON reports.

CSV headers are fixed: ``r,theta,rho`` for steady profiles, ``r,value`` for
generic radial data, ``r,M,rho`` for evolution checkpoints and ``x,y,value``
for 2D densities. Numbers are written with 17 significant digits so they
round-trip exactly.

The binary 2D format is little endian: the 8-byte magic ``KSG2D\\x00\\x01\\x00``,
uint64 n, float64 h, then n*n float64 values in row-major order (row = y).
"""

from __future__ import annotations

import csv
import json
import math
import os
import struct
from pathlib import Path

import numpy as np

from .potential import Density2D
from .radial import RadialDensity, RadialGrid

OUT_ENV = "KSGROUND_OUT"
MAGIC = b"KSG2D\x00\x01\x00"
JSON_DIGITS = 12


class FormatError(ValueError):
    """Unreadable or inconsistent input file."""


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "ksground_out"))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: list[str], columns) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c, dtype=float) for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if len(rows) < 2:
        raise FormatError(f"{path} has a header but no data")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise FormatError(f"{path}: rows do not match the {len(header)}-column header")
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite values")
    return {h: data[:, i] for i, h in enumerate(header)}


def _sanitize(obj, digits=JSON_DIGITS):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return x if digits is None else float(format(x, f".{digits}g"))
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist(), digits)
    return obj


def dumps(obj, digits: int | None = JSON_DIGITS) -> str:
    """Deterministic JSON: sorted keys, floats rounded to ``digits`` significant
    digits (None keeps the shortest exact repr)."""
    return json.dumps(_sanitize(obj, digits), sort_keys=True, indent=2) + "\n"


def write_json(path, obj, digits: int | None = JSON_DIGITS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, digits))
    return path


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read JSON {path}: {exc}") from exc


# --- radial profiles ---------------------------------------------------------

def write_profile(path, s) -> tuple[Path, Path]:
    """Steady profile CSV (r,theta,rho) and its JSON sidecar."""
    from .potential import el_residual

    csv_path = write_csv(path, ["r", "theta", "rho"], [s.grid.nodes, s.theta, s.rho])
    inner, outer = el_residual(s)
    meta = {
        "m": s.m,
        "M": s.M,
        "R": s.R,
        "theta_c": s.theta_c,
        "D": s.D,
        "residual": {"inner": inner, "outer": outer},
    }
    # full precision: the edge quadrature on reload is sensitive to R
    side = write_json(Path(path).with_suffix(".json"), meta, digits=None)
    return csv_path, side


def read_radial(path, support: float | None = None, m: float | None = None) -> RadialDensity:
    """Radial density from ``r,theta,rho``, ``r,M,rho`` or ``r,value`` CSV.

    A JSON sidecar with the same stem supplies the support radius (and, with
    ``m``, the edge exponent of a steady profile) unless ``support`` is given.
    """
    cols = read_csv(path)
    if "r" not in cols:
        raise FormatError(f"{path}: missing 'r' column")
    key = "rho" if "rho" in cols else "value" if "value" in cols else None
    if key is None:
        raise FormatError(f"{path}: need a 'rho' or 'value' column")
    try:
        grid = RadialGrid.from_nodes(cols["r"])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    values = cols[key]
    if np.any(values < 0):
        raise FormatError(f"{path}: negative density values")
    edge = None
    side = Path(path).with_suffix(".json")
    if support is None and side.exists():
        meta = read_json(side)
        if "R" in meta:
            support = float(meta["R"])
            mm = meta.get("m", m)
            edge = None if mm is None else 1.0 / (float(mm) - 1.0)
    if support is not None and support >= grid.r_max:
        support = None
    try:
        return RadialDensity(grid, values, support=support, edge_exponent=edge)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# --- 2D densities ------------------------------------------------------------

def write_2d_csv(path, rho2: Density2D) -> Path:
    X, Y = rho2.coords()
    return write_csv(path, ["x", "y", "value"], [X.ravel(), Y.ravel(), rho2.values.ravel()])


def read_2d_csv(path) -> Density2D:
    cols = read_csv(path)
    for k in ("x", "y", "value"):
        if k not in cols:
            raise FormatError(f"{path}: missing '{k}' column")
    xs, ys = np.unique(cols["x"]), np.unique(cols["y"])
    n = xs.size
    if ys.size != n or cols["x"].size != n * n:
        raise FormatError(f"{path}: expected a full square grid")
    h = (xs[-1] - xs[0]) / (n - 1)
    if not np.allclose(np.diff(xs), h, rtol=1e-9) or not np.allclose(np.diff(ys), h, rtol=1e-9):
        raise FormatError(f"{path}: grid is not uniform with equal spacing")
    ix = np.rint((cols["x"] - xs[0]) / h).astype(int)
    iy = np.rint((cols["y"] - ys[0]) / h).astype(int)
    vals = np.zeros((n, n))
    vals[iy, ix] = cols["value"]
    try:
        return Density2D(vals, h)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_2d_binary(path, rho2: Density2D) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Qd", rho2.n, rho2.h))
        fh.write(np.ascontiguousarray(rho2.values, dtype="<f8").tobytes())
    return path


def read_2d_binary(path) -> Density2D:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if raw[:8] != MAGIC or len(raw) < 24:
        raise FormatError(f"{path}: not a 2D density file")
    n, h = struct.unpack("<Qd", raw[8:24])
    body = raw[24:]
    if len(body) != 8 * n * n:
        raise FormatError(f"{path}: expected {n * n} values, found {len(body) // 8}")
    vals = np.frombuffer(body, dtype="<f8").reshape(n, n)
    try:
        return Density2D(vals.copy(), h)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_2d(path) -> Density2D:
    with open(path, "rb") as fh:
        head = fh.read(8)
    return read_2d_binary(path) if head == MAGIC else read_2d_csv(path)


def write_checkpoint(path, state) -> Path:
    from .masspde import mass_to_density

    rho = mass_to_density(state).values
    return write_csv(path, ["r", "M", "rho"], [state.grid.nodes, state.M, rho])
