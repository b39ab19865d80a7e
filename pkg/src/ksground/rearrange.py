"""Symmetric decreasing rearrangement, mass-concentration order, and the
logarithmic inequality checks built on them.

Both rearrangements go through the same representation: a nonincreasing
list of levels, each owning an equal slice of area. The radial profile at
radius r is read off at area pi r^2 by linear interpolation between slice
midpoints (constant on the first and last half slice). In the area variable
that interpolant has exactly the mass of the slices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .config import DEFAULT
from .potential import Density2D, interaction_energy, log_double_integral_2d
from .radial import MassFunction, RadialDensity, RadialGrid, is_radially_nonincreasing, mass_function

SUPERSAMPLE = 64  # area slices per radial cell when rearranging a radial profile


def _levels_to_radial(levels: np.ndarray, cell_area: float, grid: RadialGrid | None, n_out: int, declare: bool = True):
    """Radial density whose area profile interpolates nonincreasing ``levels``.

    With ``declare`` the exact slice mass is attached and the quadrature on
    the output grid is checked against it.
    """
    levels = np.asarray(levels, dtype=float)
    P = int(np.count_nonzero(levels > 0))
    exact_mass = float(levels[:P].sum() * cell_area)
    if P == 0:
        g = grid if grid is not None else RadialGrid(n_out, 1.0 / (n_out - 1))
        return RadialDensity(g, np.zeros(g.n), 0.0)
    R_supp = math.sqrt(P * cell_area / math.pi)
    if grid is None:
        grid = RadialGrid.covering(1.25 * R_supp, n_out)
    if R_supp > grid.r_max:
        raise ValueError(f"rearranged support {R_supp:.6g} exceeds grid r_max {grid.r_max:.6g}")
    a_mid = (np.arange(P) + 0.5) * cell_area
    area = math.pi * grid.nodes**2
    vals = np.interp(area, a_mid, levels[:P])
    vals[grid.nodes > R_supp] = 0.0
    support = R_supp if R_supp < grid.r_max else None
    return RadialDensity(grid, vals, exact_mass if declare else None, support=support)


def _sorted_desc(values: np.ndarray) -> np.ndarray:
    # stable: equal values keep ascending index order
    order = np.argsort(-values, kind="stable")
    return values[order]


def rearrange_radial(rho: RadialDensity, supersample: int = SUPERSAMPLE) -> RadialDensity:
    """Symmetric decreasing rearrangement of a radial profile.

    A profile that is already nonincreasing is returned unchanged. Otherwise
    the disk out to the support is cut into ``supersample * (n - 1)``
    equal-area slices, each taking the value at its midpoint radius; the
    sorted slices give the output on the input grid. Values between nodes
    come from a monotone cubic (PCHIP): it never leaves the range of the
    neighbouring nodes, and unlike linear interpolation it keeps the L^p
    norms for p > 1 to third order.
    """
    if is_radially_nonincreasing(rho, 0.0):
        return rho
    grid = rho.grid
    r_end = min(rho.support_radius(), grid.r_max)
    K = supersample * (grid.n - 1)
    cell_area = math.pi * r_end**2 / K
    r_mid = np.sqrt((np.arange(K) + 0.5) * cell_area / math.pi)
    k = grid.n - 1 if rho.support is None else grid.last_index_at_or_below(rho.support)
    # past the last node inside the support the end piece is extended, then clipped at 0
    interp = PchipInterpolator(grid.nodes[: k + 1], rho.values[: k + 1], extrapolate=True)
    vals = np.clip(interp(r_mid), 0.0, None)
    # the input grid may be too coarse for the slice mass check (jumps, narrow peaks)
    return _levels_to_radial(_sorted_desc(vals), cell_area, grid, grid.n, declare=False)


def rearrange_2d(rho2: Density2D, n_out: int | None = None, grid: RadialGrid | None = None) -> RadialDensity:
    """Sort the cells descending; the k-th value fills the k-th slice of area h^2."""
    levels = _sorted_desc(rho2.values.ravel())
    if n_out is None:
        n_out = 32769
    return _levels_to_radial(levels, rho2.h**2, grid, n_out)


class Verdict(enum.Enum):
    LessConcentrated = "LessConcentrated"
    MoreConcentrated = "MoreConcentrated"
    Equal = "Equal"
    Crossing = "Crossing"


@dataclass(frozen=True)
class ConcentrationOrder:
    verdict: Verdict
    max_gap: float  # M1 - M2 where |M1 - M2| is largest
    crossing_radii: list = field(default_factory=list)


def _as_mass_function(rho) -> MassFunction:
    if isinstance(rho, MassFunction):
        return rho
    if isinstance(rho, Density2D):
        rho = rearrange_2d(rho)
    return mass_function(rho)


def compare_concentration(rho1, rho2, tol: float = DEFAULT.ordering_rtol, n_eval: int = 4001) -> ConcentrationOrder:
    """Pointwise comparison of the two mass functions on a common radius set.

    Inputs may be radial densities, mass functions, or 2D densities (which
    are rearranged first). ``tol`` is relative to the larger total mass.
    """
    a, b = _as_mass_function(rho1), _as_mass_function(rho2)
    r_top = max(a.grid.r_max, b.grid.r_max)
    r = np.unique(np.concatenate([a.grid.nodes, b.grid.nodes, np.linspace(0.0, r_top, n_eval)]))
    diff = a(r) - b(r)
    band = tol * max(a.total, b.total, 1e-300)
    i = int(np.argmax(np.abs(diff)))
    gap = float(diff[i])
    above, below = diff > band, diff < -band
    if not above.any() and not below.any():
        return ConcentrationOrder(Verdict.Equal, gap, [])
    if not above.any():
        return ConcentrationOrder(Verdict.LessConcentrated, gap, [])
    if not below.any():
        return ConcentrationOrder(Verdict.MoreConcentrated, gap, [])
    sign = np.where(above, 1, np.where(below, -1, 0))
    idx = np.nonzero(sign)[0]
    flips = idx[1:][sign[idx[1:]] != sign[idx[:-1]]]
    prev = idx[:-1][sign[idx[1:]] != sign[idx[:-1]]]
    radii = [float(0.5 * (r[p] + r[q])) for p, q in zip(prev, flips)]
    return ConcentrationOrder(Verdict.Crossing, gap, radii)


def _log_integral_radial(rho: RadialDensity) -> float:
    # int int log|x-y| rho rho = 4 pi W
    return 4.0 * math.pi * interaction_energy(rho)


def riesz_log_check(rho2: Density2D, tol: float = DEFAULT.riesz_rtol) -> tuple[float, float, bool]:
    """(log double integral of rho, same for its rearrangement, ordering holds).

    The left side is a direct sum over cells, the right side the radial
    potential of the rearranged profile. The comparison slack is ``tol``
    times the larger of the two magnitudes and M^2.
    """
    before = log_double_integral_2d(rho2)
    after = _log_integral_radial(rearrange_2d(rho2))
    scale = max(abs(before), abs(after), rho2.mass**2)
    return before, after, bool(before >= after - tol * scale)


def hls_constant(M: float) -> float:
    """Sharp log-HLS constant C(M) = M (1 + log pi - log M)."""
    return M * (1.0 + math.log(math.pi) - math.log(M))


def log_hls_check(rho: RadialDensity, tol: float = 0.0) -> tuple[float, float, bool]:
    """(int rho log rho, -(2/M) int int log|x-y| rho rho - C(M), lhs >= rhs - slack).

    The slack is ``tol`` times max(|lhs|, |rhs|, M).
    """
    M = rho.mass
    if not M > 0:
        raise ValueError("log-HLS check needs a density of positive mass")
    v = rho.values
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)
    lhs = rho.integrate(f, power=None)
    rhs = -2.0 / M * _log_integral_radial(rho) - hls_constant(M)
    slack = tol * max(abs(lhs), abs(rhs), M)
    return float(lhs), float(rhs), bool(lhs >= rhs - slack)


def extremal_density(M: float, lam: float, r_trunc: float, n: int) -> RadialDensity:
    """M lam^2 / (pi (lam^2 + r^2)^2) cut off at ``r_trunc`` and renormalised to mass M."""
    grid = RadialGrid.covering(r_trunc * 1.01, n)
    r = grid.nodes
    vals = np.where(r <= r_trunc, M * lam**2 / (math.pi * (lam**2 + r**2) ** 2), 0.0)
    kept = r_trunc**2 / (lam**2 + r_trunc**2)  # mass fraction inside r_trunc
    return RadialDensity(grid, vals / kept, M, support=r_trunc, rtol=1e-6)
