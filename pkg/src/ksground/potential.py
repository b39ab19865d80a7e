"""Logarithmic Newtonian potentials, free energy, Euler-Lagrange residuals.

Kernel convention: K(x) = -(1/2 pi) log|x|, u = K * rho, so -Lap u = rho.
For radial sources u'(r) = -M(r) / (2 pi r) and u(r) = -(M / 2 pi) log r
outside the support; the radial route integrates the first identity inward
from the exact exterior value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.signal import convolve

from .config import DEFAULT
from .radial import (
    RadialDensity,
    RadialGrid,
    _composite_weights,
    is_radially_nonincreasing,
    mass_function,
)

if TYPE_CHECKING:
    from .steady import SteadyState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Potential:
    grid: RadialGrid
    values: np.ndarray
    M: float
    R_supp: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inner = np.interp(r, self.grid.nodes, self.values)
        with np.errstate(divide="ignore"):
            outer = -self.M / TWO_PI * np.log(r)
        return np.where(r >= self.R_supp, outer, inner)


def newtonian_potential_radial(rho: RadialDensity, R_supp: float | None = None) -> Potential:
    grid = rho.grid
    r = grid.nodes
    R_s = rho.support_radius() if R_supp is None else float(R_supp)
    if R_s >= grid.r_max:
        raise ValueError(
            f"support radius {R_s:.6g} touches the grid boundary r_max={grid.r_max:.6g}"
        )
    Mvals = mass_function(rho).values
    M = float(Mvals[-1])
    u = np.zeros(grid.n)
    if M == 0.0 or R_s == 0.0:
        return Potential(grid, u, M, R_s)

    k = grid.last_index_at_or_below(R_s)
    outside = r >= R_s
    u[outside] = -M / TWO_PI * np.log(r[outside])

    # f = M(r) / (2 pi r) -> 0 at the origin
    f = np.zeros(k + 1)
    f[1:] = Mvals[1 : k + 1] / (TWO_PI * r[1 : k + 1])
    if k >= 2:
        F = cumulative_simpson(f, dx=grid.dr, initial=0.0)
        # quadratic through the last three nodes, integrated from r_k to R_s
        s = (R_s - r[k]) / grid.dr
        a, b, c = f[k], (3 * f[k] - 4 * f[k - 1] + f[k - 2]) / 2, (f[k] - 2 * f[k - 1] + f[k - 2]) / 2
        tail = grid.dr * (a * s + b * s**2 / 2 + c * s**3 / 3)
    else:
        F = np.concatenate([[0.0], np.cumsum(0.5 * grid.dr * (f[1:] + f[:-1]))])
        tail = f[k] * (R_s - r[k])
    u_edge = -M / TWO_PI * math.log(R_s)
    inside = np.arange(k + 1)
    inside = inside[~outside[: k + 1]]
    u[inside] = u_edge + (F[k] - F[inside]) + tail
    return Potential(grid, u, M, R_s)


def entropy(rho: RadialDensity, m: float) -> float:
    if not m > 1:
        raise ValueError(f"entropy needs m > 1, got {m}")
    return rho.integrate(rho.values**m, power=m) / (m - 1.0)


def interaction_energy(rho: RadialDensity, potential: Potential | None = None) -> float:
    """W = -(1/2) int u rho = (1 / 4 pi) double integral of log|x-y| rho rho."""
    if potential is None:
        potential = newtonian_potential_radial(rho)
    return -0.5 * rho.integrate(potential.values * rho.values)


@dataclass(frozen=True)
class EnergyBreakdown:
    H: float
    W: float
    G: float
    D_formula: float
    D_profile: float
    D_profile_std: float
    norm_m: float  # ||rho||_m^m

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def free_energy(rho: RadialDensity, m: float, window: float = 0.9) -> EnergyBreakdown:
    """Entropy, interaction, total energy and the multiplier computed two ways.

    D_formula = (2/M) G + (m-2)/(M(m-1)) ||rho||_m^m. D_profile is the mean of
    (m/(m-1)) rho^(m-1) - u over the inner ``window`` fraction of the support.
    """
    pot = newtonian_potential_radial(rho)
    norm_m = rho.integrate(rho.values**m, power=m)
    H = norm_m / (m - 1.0)
    W = interaction_energy(rho, pot)
    G = H + W
    M = rho.mass
    D_formula = 2.0 / M * G + (m - 2.0) / (M * (m - 1.0)) * norm_m
    inner = rho.nodes <= window * pot.R_supp
    xi = m / (m - 1.0) * rho.values[inner] ** (m - 1.0) - pot.values[inner]
    return EnergyBreakdown(H, W, G, D_formula, float(xi.mean()), float(xi.std()), norm_m)


def el_residual(s: SteadyState, D: float | None = None) -> tuple[float, float]:
    """(sup |(m/(m-1)) theta - u - D| on the support, sup (u + D)_+ outside)."""
    D = s.D if D is None else D
    pot = newtonian_potential_radial(s.density(), s.R)
    r = s.grid.nodes
    inside = r < s.R
    factor = s.m / (s.m - 1.0)
    inner = np.max(np.abs(factor * s.theta[inside] - pot.values[inside] - D))
    outside = r > s.R
    outer = float(np.max(np.maximum(pot.values[outside] + D, 0.0), initial=0.0))
    return float(inner), outer


# --- truncated interaction and confinement -------------------------------

def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _angular_log(r, s, cut, n_gauss=48):
    """int_0^{2pi} int_0^{2pi} log|x-y| 1{|x-y| > cut} over both angles.

    ``r`` and ``s`` broadcast. With cut = 0 this is 4 pi^2 log max(r, s).
    """
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    full = 4 * math.pi**2 * np.log(np.maximum(np.maximum(r, s), 1e-300))
    if cut <= 0:
        return full
    rs = r * s
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = (r * r + s * s - cut * cut) / (2 * rs)
    out = np.where(np.abs(r - s) >= cut, full, 0.0)
    partial = (np.abs(r - s) < cut) & (r + s > cut)
    if np.any(partial):
        phi0 = np.arccos(np.clip(c0[partial], -1.0, 1.0))
        x, w = _gauss(n_gauss)
        # phi in [phi0, pi], doubled by symmetry, times 2 pi for the other angle
        half = 0.5 * (math.pi - phi0)
        phi = phi0[:, None] + half[:, None] * (x[None, :] + 1.0)
        rr, ss = r[partial][:, None], s[partial][:, None]
        d2 = rr * rr + ss * ss - 2 * rr * ss * np.cos(phi)
        vals = 0.5 * np.log(d2)
        out[partial] = 4 * math.pi * half * (vals @ w)
    return out


def _coarse(rho: RadialDensity, n_coarse: int):
    R_s = rho.support_radius()
    r_end = R_s if R_s > 0 else rho.grid.r_max
    n_coarse = int(n_coarse) | 1
    r = np.linspace(0.0, r_end, n_coarse)
    vals = np.interp(r, rho.nodes, rho.values)
    if rho.support is not None:
        # left limit at the support edge
        k = rho.grid.last_index_at_or_below(rho.support)
        vals[-1] = rho.values[k]
    w = _composite_weights(n_coarse - 1) * (r[1] - r[0]) * r * vals
    return r, w


def log_double_integral(rho: RadialDensity, cut: float = 0.0, n_coarse: int = 401) -> float:
    """int int_{|x-y| > cut} log|x-y| rho(x) rho(y) dx dy by annular quadrature."""
    r, w = _coarse(rho, n_coarse)
    K = _angular_log(r[:, None], r[None, :], cut)
    return float(w @ K @ w)


def truncated_interaction(rho: RadialDensity, R: float, n_coarse: int = 401) -> float:
    """W_R[rho]: the log double integral restricted to |x - y| > R."""
    return log_double_integral(rho, R, n_coarse)


def near_abs_log(rho: RadialDensity, R: float, n_coarse: int = 401) -> float:
    """int int_{|x-y| <= R} |log|x-y|| rho rho, for R >= 1."""
    if R < 1:
        raise ValueError("near-field |log| split assumes R >= 1")
    full = log_double_integral(rho, 0.0, n_coarse)
    return -full + 2 * log_double_integral(rho, 1.0, n_coarse) - log_double_integral(rho, R, n_coarse)


def confinement_sides(rho: RadialDensity, R: float, n_coarse: int = 401) -> tuple[float, float]:
    """(W_1[rho], (M log R / 2) int_{|x|>R} rho)."""
    if R < 1:
        raise ValueError(f"confinement bound needs R >= 1, got {R}")
    if not is_radially_nonincreasing(rho, DEFAULT.monotone_abs):
        raise ValueError("confinement bound needs a radially nonincreasing density")
    lhs = truncated_interaction(rho, 1.0, n_coarse)
    outside = rho.mass - float(mass_function(rho)(R))
    rhs = rho.mass * math.log(R) / 2.0 * max(outside, 0.0)
    return lhs, rhs


def confinement_check(rho: RadialDensity, R: float, tol: float = 0.0) -> bool:
    lhs, rhs = confinement_sides(rho, R)
    return lhs >= rhs - tol * abs(lhs)


# --- Cartesian densities and direct summation -----------------------------

def square_log_integral(h: float) -> float:
    """int over the centred h x h square of log|y| dy (closed form).

    With a = h/2: 2 a^2 (2 log a + log 2 - 3 + pi/2).
    """
    a = 0.5 * h
    return 2 * a * a * (2 * math.log(a) + math.log(2.0) - 3.0 + math.pi / 2)


@dataclass(frozen=True)
class Density2D:
    values: np.ndarray  # (n, n), row index = y, column index = x
    h: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square grid, got shape {v.shape}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("2D density must be finite and nonnegative")
        if not self.h > 0:
            raise ValueError("cell size must be positive")
        if v.size and (np.any(v[0]) or np.any(v[-1]) or np.any(v[:, 0]) or np.any(v[:, -1])):
            raise ValueError("support must lie strictly inside the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - 0.5 * (self.n - 1)) * self.h

    def coords(self):
        x = self.axis
        return np.meshgrid(x, x)  # X varies along columns

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.h**2)

    @property
    def center_of_mass(self) -> np.ndarray:
        X, Y = self.coords()
        w = self.values * self.h**2
        M = w.sum()
        if M == 0:
            return np.zeros(2)
        return np.array([(X * w).sum() / M, (Y * w).sum() / M])

    def support_radius(self, center=None) -> float:
        """Radius of the smallest centred disk containing every positive cell."""
        c = self.center_of_mass if center is None else np.asarray(center)
        X, Y = self.coords()
        pos = self.values > 0
        if not pos.any():
            return 0.0
        d = np.hypot(X[pos] - c[0], Y[pos] - c[1])
        return float(d.max() + self.h / math.sqrt(2.0))

    @classmethod
    def from_function(cls, f, n: int, h: float) -> Density2D:
        x = (np.arange(n) - 0.5 * (n - 1)) * h
        X, Y = np.meshgrid(x, x)
        return cls(np.maximum(f(X, Y), 0.0), h)


def _offset_log_table(n: int, h: float) -> np.ndarray:
    d = np.arange(-(n - 1), n)
    DX, DY = np.meshgrid(d, d)
    dist = h * np.hypot(DX, DY)
    with np.errstate(divide="ignore"):
        T = np.log(dist) * h * h
    T[n - 1, n - 1] = square_log_integral(h)
    return T


def potential_2d(rho2: Density2D) -> np.ndarray:
    """u at every cell centre by direct summation over cells.

    The self cell uses the exact integral of log over a square.
    """
    T = _offset_log_table(rho2.n, rho2.h)
    S = convolve(rho2.values, T, mode="same", method="fft")
    return -S / TWO_PI


def log_double_integral_2d(rho2: Density2D) -> float:
    """int int log|x-y| rho rho by direct summation (= -2 pi int u rho)."""
    u = potential_2d(rho2)
    return float(-TWO_PI * np.sum(u * rho2.values) * rho2.h**2)


def potential_at(rho2: Density2D, points, center=None) -> np.ndarray:
    """u at arbitrary points (shape (k, 2)) away from the support."""
    c = np.zeros(2) if center is None else np.asarray(center)
    X, Y = rho2.coords()
    pos = rho2.values > 0
    yx, yy = X[pos] - c[0], Y[pos] - c[1]
    w = rho2.values[pos] * rho2.h**2
    pts = np.atleast_2d(points)
    out = np.empty(len(pts))
    for start in range(0, len(pts), 256):
        p = pts[start:start + 256]
        d2 = (p[:, 0:1] - yx[None, :]) ** 2 + (p[:, 1:2] - yy[None, :]) ** 2
        out[start:start + 256] = -(0.5 * np.log(d2)) @ w / TWO_PI
    return out


@dataclass(frozen=True)
class FarField:
    C1_est: float
    C2_est: float
    r_o: float
    radii: tuple


def far_field_check(
    rho2: Density2D,
    r_o: float | None = None,
    radii_factors=(2.0, 2.5, 3.0, 3.5, 4.0),
    n_angles: int = 64,
) -> FarField:
    """Sup over rings |x| = f r_o of |u - MK| |x|^2 / r_o^2 and the gradient analogue.

    The source is recentred at its centre of mass first. Gradients are
    centred differences of u - MK with step 1e-4 r_o.
    """
    com = rho2.center_of_mass
    supp = rho2.support_radius(com)
    r_o = supp if r_o is None else float(r_o)
    if supp > r_o * (1 + 1e-12):
        raise ValueError(
            f"support radius {supp:.6g} exceeds r_o={r_o:.6g}; evaluation ring too close"
        )
    M = rho2.mass
    ang = (np.arange(n_angles) + 0.5) * 2 * math.pi / n_angles
    C1 = C2 = 0.0
    delta = 1e-4 * r_o

    def excess(pts):
        return potential_at(rho2, pts, com) + M / TWO_PI * np.log(np.hypot(pts[:, 0], pts[:, 1]))

    for f in radii_factors:
        rad = f * r_o
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        e = excess(pts)
        ex = np.array([delta, 0.0])
        ey = np.array([0.0, delta])
        gx = (excess(pts + ex) - excess(pts - ex)) / (2 * delta)
        gy = (excess(pts + ey) - excess(pts - ey)) / (2 * delta)
        C1 = max(C1, float(np.max(np.abs(e))) * rad**2 / r_o**2)
        C2 = max(C2, float(np.max(np.hypot(gx, gy))) * rad**3 / r_o**2)
    return FarField(C1, C2, r_o, tuple(radii_factors))
