"""Uniform radial grids, quadrature in the plane, mass functions and norms.

A radial function ``f(r)`` on R^2 is integrated as ``int f(r) 2 pi r dr``.
Densities may carry an explicit ``support`` radius: beyond it the density is
zero, and the values to its left are the smooth interior branch. Quadrature
then stops exactly at the support instead of smearing the jump (or the
square-root edge) over a grid cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .config import DEFAULT

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RadialGrid:
    n: int
    dr: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs at least 3 nodes, got n={self.n}")
        if not self.dr > 0:
            raise ValueError(f"grid spacing must be positive, got dr={self.dr}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.dr

    @property
    def r_max(self) -> float:
        return (self.n - 1) * self.dr

    @classmethod
    def covering(cls, r_max: float, n: int) -> RadialGrid:
        """Grid of ``n`` nodes whose last node sits at ``r_max``."""
        return cls(n, r_max / (n - 1))

    @classmethod
    def from_nodes(cls, r, rtol: float = 1e-9) -> RadialGrid:
        """Rebuild a grid from its node column, checking uniformity."""
        r = np.asarray(r, dtype=float)
        if r.ndim != 1 or r.size < 3:
            raise ValueError("need at least 3 radial nodes")
        if abs(r[0]) > rtol * max(abs(r[-1]), 1.0):
            raise ValueError("first radial node must be r = 0")
        dr = (r[-1] - r[0]) / (r.size - 1)
        if dr <= 0 or np.max(np.abs(np.diff(r) - dr)) > rtol * max(r[-1], 1.0) + 1e-12:
            raise ValueError("radial nodes are not uniformly spaced")
        return cls(r.size, dr)

    def last_index_at_or_below(self, radius: float) -> int:
        k = int(np.floor(radius / self.dr + 1e-9))
        return min(max(k, 0), self.n - 1)


def _composite_weights(k: int) -> np.ndarray:
    """Weights (in units of dr) integrating nodes 0..k exactly for cubics.

    Simpson on an even number of intervals; with an odd count the last
    three intervals use the 3/8 rule. A single interval is a trapezoid.
    """
    if k == 0:
        return np.zeros(1)
    w = np.zeros(k + 1)
    if k == 1:
        w[:] = 0.5
        return w
    n_simpson = k if k % 2 == 0 else k - 3
    if n_simpson > 0:
        w[0:n_simpson + 1:2] += 2.0 / 3.0
        w[1:n_simpson:2] += 4.0 / 3.0
        w[0] -= 1.0 / 3.0
        w[n_simpson] -= 1.0 / 3.0
    if k % 2 == 1:
        s = n_simpson
        w[s:s + 4] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


def _partial_cell(g: np.ndarray, grid: RadialGrid, k: int, upper: float) -> float:
    """int_{r_k}^{upper} g dr using the quadratic through nodes k-2, k-1, k."""
    h = upper - k * grid.dr
    if h <= 0:
        return 0.0
    if k == 0:
        return float(g[0] * h)
    if k == 1:
        slope = (g[1] - g[0]) / grid.dr
        return float(g[1] * h + 0.5 * slope * h * h)
    # local coordinate s = (r - r_k)/dr on nodes s = -2, -1, 0
    g0, g1, g2 = g[k - 2], g[k - 1], g[k]
    a = g2
    b = (3 * g2 - 4 * g1 + g0) / 2.0
    c = (g2 - 2 * g1 + g0) / 2.0
    s = h / grid.dr
    return float(grid.dr * (a * s + b * s**2 / 2 + c * s**3 / 3))


EDGE_CELLS = 10


def _edge_integral(g: np.ndarray, r: np.ndarray, upper: float, q: float, p: float) -> float:
    """int_{r[0]}^{upper} g dr where g = t**q * h(t), t = upper - r.

    h is fitted by least squares on the basis t**e for e in {0, 1, 2, 3,
    1 + p, 2 + p}: a profile vanishing linearly in theta = rho**(1/p) has
    exactly these terms in its edge expansion. The monomials are integrated
    exactly.
    """
    t = upper - r
    keep = t > 1e-9 * (r[1] - r[0])
    exps = sorted({0.0, 1.0, 2.0, 3.0, 1.0 + p, 2.0 + p})
    A = np.column_stack([t[keep] ** e for e in exps])
    coef, *_ = np.linalg.lstsq(A, g[keep] / t[keep] ** q, rcond=None)
    L = t[0]
    return float(sum(c * L ** (q + e + 1) / (q + e + 1) for c, e in zip(coef, exps)))


def integrate_radial(
    f,
    grid: RadialGrid,
    upper: float | None = None,
    edge_exponent: float | None = None,
    power: float = 1.0,
) -> float:
    """Value of ``int_0^upper f(r) 2 pi r dr`` (whole grid when ``upper`` is None).

    ``edge_exponent`` p says the density behind f vanishes like
    (upper - r)**p and f like its ``power``-th power. Only a non-integer p
    needs special treatment; the last cells are then integrated with the
    singular weight.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} values, got shape {f.shape}")
    g = f * TWO_PI * grid.nodes
    if upper is None or upper >= grid.r_max:
        return float(grid.dr * np.dot(_composite_weights(grid.n - 1), g))
    k = grid.last_index_at_or_below(upper)
    singular = edge_exponent is not None and abs(edge_exponent - round(edge_exponent)) > 1e-9
    if singular and k > 3 * EDGE_CELLS:
        j = k - EDGE_CELLS
        head = grid.dr * np.dot(_composite_weights(j), g[: j + 1])
        tail = _edge_integral(
            g[j : k + 1], grid.nodes[j : k + 1], upper, edge_exponent * power, edge_exponent
        )
        return float(head + tail)
    total = grid.dr * np.dot(_composite_weights(k), g[: k + 1])
    return float(total + _partial_cell(g, grid, k, upper))


def cumulative_radial(
    f, grid: RadialGrid, upper: float | None = None, edge_exponent: float | None = None
) -> np.ndarray:
    """Running integral ``int_0^{r_i} f 2 pi s ds`` at every node."""
    f = np.asarray(f, dtype=float)
    g = f * TWO_PI * grid.nodes
    if upper is None or upper >= grid.r_max:
        return cumulative_simpson(g, dx=grid.dr, initial=0.0)
    k = grid.last_index_at_or_below(upper)
    out = np.empty(grid.n)
    if k >= 2:
        out[: k + 1] = cumulative_simpson(g[: k + 1], dx=grid.dr, initial=0.0)
    else:
        out[0] = 0.0
        if k == 1:
            out[1] = 0.5 * grid.dr * (g[0] + g[1])
    out[k + 1:] = integrate_radial(f, grid, upper, edge_exponent)
    return out


@dataclass(frozen=True)
class RadialDensity:
    grid: RadialGrid
    values: np.ndarray
    declared_mass: float | None = None
    support: float | None = None
    edge_exponent: float | None = None  # rho ~ (support - r)**q at the edge
    rtol: float = field(default=DEFAULT.solver_rtol, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if np.any(values < 0):
            raise ValueError(f"density must be nonnegative (min {values.min():.3e})")
        if self.support is not None:
            if not 0 < self.support <= self.grid.r_max * (1 + 1e-12):
                raise ValueError(f"support {self.support} outside grid [0, {self.grid.r_max}]")
            values[self.grid.nodes > self.support * (1 + 1e-12)] = 0.0
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        mass = self.integrate(values)
        if self.declared_mass is None:
            object.__setattr__(self, "declared_mass", mass)
        elif abs(mass - self.declared_mass) > self.rtol * max(abs(self.declared_mass), 1e-300):
            raise ValueError(
                f"quadrature mass {mass:.10g} differs from declared mass {self.declared_mass:.10g}"
            )

    @property
    def mass(self) -> float:
        return self.declared_mass

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def support_radius(self) -> float:
        """Explicit support, else the first node past the last positive value."""
        if self.support is not None:
            return self.support
        pos = np.nonzero(self.values > 0)[0]
        if pos.size == 0:
            return 0.0
        return min(pos[-1] + 1, self.grid.n - 1) * self.grid.dr

    def integrate(self, f, power: float | None = 1.0) -> float:
        """Integrate a companion array over the support.

        ``power`` states that f vanishes at the support edge like rho**power
        (rho**m has power m, u * rho has power 1); None disables the edge rule.
        """
        if power is None or self.support is None:
            return integrate_radial(f, self.grid, self.support)
        return integrate_radial(f, self.grid, self.support, self.edge_exponent, power)

    def scaled(self, factor: float) -> RadialDensity:
        return RadialDensity(
            self.grid, factor * self.values, factor * self.mass, self.support, self.edge_exponent
        )


@dataclass(frozen=True)
class MassFunction:
    grid: RadialGrid
    values: np.ndarray
    total: float

    def __call__(self, r):
        """Interpolated mass inside radius ``r``; saturates at ``total``."""
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.grid.nodes, self.values)
        return np.where(r > self.grid.r_max, self.total, out)


def mass_function(rho: RadialDensity) -> MassFunction:
    vals = cumulative_radial(rho.values, rho.grid, rho.support, rho.edge_exponent)
    vals = np.maximum.accumulate(np.maximum(vals, 0.0))
    return MassFunction(rho.grid, vals, rho.mass)


def lp_norm(rho: RadialDensity, p: float) -> float:
    if p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    return rho.integrate(rho.values**p, power=p) ** (1.0 / p)


def is_radially_nonincreasing(rho: RadialDensity, tol: float = 0.0) -> bool:
    v = rho.values
    return bool(np.all(v[1:] <= v[:-1] + tol))


def uniform_disk(grid: RadialGrid, c: float, radius: float) -> RadialDensity:
    """Density ``c`` on the disk of given radius, zero outside."""
    values = np.where(grid.nodes <= radius * (1 + 1e-12), c, 0.0)
    return RadialDensity(grid, values, c * np.pi * radius**2, support=radius)
