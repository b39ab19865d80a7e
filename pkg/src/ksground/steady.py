"""Radial ground states by shooting on the Emden-Fowler equation.

Inside the support, ``theta = rho**(m-1)`` solves

    theta'' + theta'/r + c * theta**p = 0,   c = (m-1)/m,  p = 1/(m-1),

with ``theta(0) = theta_c`` and ``theta'(0) = 0``. The first zero of theta is
the support radius R. Integrating the equation against ``2 pi r`` gives the
flux identity

    int_{B_r} rho = -(2 pi / c) * r * theta'(r),

so the mass inside any radius (in particular the total mass) comes straight
out of the shot, without quadrature across the free boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .config import DEFAULT
from .radial import MassFunction, RadialDensity, RadialGrid


class SupportExceedsDomain(RuntimeError):
    """Shooting reached r_max before theta vanished."""


class SolverError(RuntimeError):
    pass


def _exponents(m: float) -> tuple[float, float]:
    if not m > 1:
        raise ValueError(f"diffusion exponent must exceed 1, got m={m}")
    return (m - 1.0) / m, 1.0 / (m - 1.0)


def length_scale(m: float, theta_c: float) -> float:
    """Natural radius for a given central value (exact Emden-Fowler scaling)."""
    _, p = _exponents(m)
    return theta_c ** ((1.0 - p) / 2.0)


@dataclass(frozen=True)
class Shot:
    """Result of one outward integration."""

    grid: RadialGrid
    theta: np.ndarray  # clamped to zero beyond R
    dtheta: np.ndarray  # zero beyond R
    R: float
    dtheta_R: float
    m: float

    @property
    def theta_c(self) -> float:
        return float(self.theta[0])

    @property
    def mass(self) -> float:
        c, _ = _exponents(self.m)
        return -2.0 * math.pi / c * self.R * self.dtheta_R


def _rk4_step(r, th, ph, h, c, p):
    # theta_+ power: integration is well defined past small negative excursions
    def rhs(r_, th_, ph_):
        return ph_, -ph_ / r_ - c * (th_ if th_ > 0.0 else 0.0) ** p

    k1t, k1p = rhs(r, th, ph)
    k2t, k2p = rhs(r + 0.5 * h, th + 0.5 * h * k1t, ph + 0.5 * h * k1p)
    k3t, k3p = rhs(r + 0.5 * h, th + 0.5 * h * k2t, ph + 0.5 * h * k2p)
    k4t, k4p = rhs(r + h, th + h * k3t, ph + h * k3p)
    return (
        th + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t),
        ph + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p),
    )


def series_start(m: float, theta_c: float, r: float) -> tuple[float, float]:
    """(theta, theta') near the origin from the even power series to r**4."""
    c, p = _exponents(m)
    a2 = -c * theta_c**p / 4.0
    a4 = c * c * p * theta_c ** (2 * p - 1) / 64.0
    return theta_c + a2 * r * r + a4 * r**4, 2 * a2 * r + 4 * a4 * r**3


EDGE_SWITCH = 0.25  # m > 2: below this fraction of theta_c the shot continues in rho


def _edge_in_density(m, r_k, th_k, ph_k, nodes_after, rtol=1e-13):
    """Finish a shot with rho = theta**p as the independent variable.

    For m > 2 the term theta**p is not smooth at the free boundary, which
    caps RK4 in r at order 2 + p there. In rho the system

        dr/drho = (m-1) rho**(m-2) / theta',
        dtheta'/drho = (m-1) rho**(m-2) (-theta'/r - c rho) / theta'

    is smooth (polynomial for integer m) and the edge is simply rho = 0.
    Returns R, theta'(R) and (theta, theta') at the requested nodes.
    """
    c, p = _exponents(m)
    rho_k = th_k**p

    def rhs(rho, y):
        r, ph = y
        w = (m - 1.0) * rho ** (m - 2.0) / ph
        return [w, w * (-ph / r - c * rho)]

    sol = solve_ivp(
        rhs, (rho_k, 0.0), [r_k, ph_k], method="DOP853", rtol=rtol, atol=1e-15 * max(r_k, 1.0),
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"edge integration failed: {sol.message}")
    R, dtheta_R = (float(v) for v in sol.y[:, -1])
    nodes_after = np.asarray(nodes_after, dtype=float)
    inside = nodes_after < R
    targets = nodes_after[inside]
    th = np.zeros(nodes_after.size)
    ph = np.zeros(nodes_after.size)
    if targets.size == 0:
        return R, dtheta_R, th, ph
    # r(rho) decreases in rho: vectorised bisection for rho at each node
    lo = np.zeros(targets.size)
    hi = np.full(targets.size, rho_k)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        r_mid = sol.sol(mid)[0]
        above = r_mid > targets
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    rho_nodes = 0.5 * (lo + hi)
    th[inside] = rho_nodes ** (m - 1.0)
    ph[inside] = sol.sol(rho_nodes)[1]
    return R, dtheta_R, th, ph


def shoot_profile(m: float, theta_c: float, dr: float, r_max: float | None = None) -> Shot:
    """Integrate outward with classical RK4 until theta first vanishes.

    For m <= 2 the free boundary is located by bisection on the step length
    of a single RK4 step from the last positive node, down to ``dr * 1e-6``.
    For m > 2 the last stretch below ``EDGE_SWITCH * theta_c`` is handed to
    :func:`_edge_in_density`, which lands on the edge exactly.
    """
    c, p = _exponents(m)
    if not theta_c > 0:
        raise ValueError(f"central value must be positive, got {theta_c}")
    if not dr > 0:
        raise ValueError(f"step must be positive, got {dr}")
    if r_max is None:
        r_max = 8.0 * length_scale(m, theta_c) + 4 * dr
    n = int(math.ceil(r_max / dr)) + 1
    grid = RadialGrid(n, dr)
    theta = np.zeros(n)
    dtheta = np.zeros(n)
    zero = DEFAULT.zero_rel * theta_c
    switch = EDGE_SWITCH * theta_c if m > 2 else zero

    theta[0] = theta_c
    th, ph = series_start(m, theta_c, dr)
    i = 1
    while True:
        if th <= switch:
            break
        theta[i], dtheta[i] = th, ph
        if i == n - 1:
            raise SupportExceedsDomain(
                f"support exceeds domain: theta still {th:.3e} at r_max={grid.r_max:.6g}"
            )
        th, ph = _rk4_step(i * dr, th, ph, dr, c, p)
        i += 1

    if m > 2 and th > zero:
        theta[i], dtheta[i] = th, ph
        R, dtheta_R, th_rest, ph_rest = _edge_in_density(m, i * dr, th, ph, grid.nodes[i + 1:])
        if R >= grid.r_max:
            raise SupportExceedsDomain(f"support exceeds domain: R={R:.6g} > r_max={grid.r_max:.6g}")
        theta[i + 1:], dtheta[i + 1:] = th_rest, ph_rest
        return Shot(grid, theta, dtheta, R, dtheta_R, m)

    k = i - 1  # last node with theta > 0
    r_k = k * dr
    th_k, ph_k = theta[k], dtheta[k]
    if k == 0:
        def step_to(h):
            return series_start(m, theta_c, h)
    else:
        def step_to(h):
            return _rk4_step(r_k, th_k, ph_k, h, c, p)

    lo, hi = 0.0, dr
    while hi - lo > dr * DEFAULT.root_rel:
        mid = 0.5 * (lo + hi)
        if step_to(mid)[0] > zero:
            lo = mid
        else:
            hi = mid
    h = 0.5 * (lo + hi)
    _, dtheta_R = step_to(h)
    return Shot(grid, theta, dtheta, r_k + h, dtheta_R, m)


@dataclass(frozen=True)
class SteadyState:
    m: float
    M: float
    grid: RadialGrid
    theta: np.ndarray
    R: float
    theta_c: float
    D: float
    dtheta: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        for name in ("theta", "dtheta"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def exponent(self) -> float:
        return 1.0 / (self.m - 1.0)

    @property
    def rho(self) -> np.ndarray:
        return np.maximum(self.theta, 0.0) ** self.exponent

    def density(self) -> RadialDensity:
        return RadialDensity(self.grid, self.rho, self.M, support=self.R, edge_exponent=self.exponent)

    def flux_mass_function(self) -> MassFunction:
        """Mass inside r_i from the flux identity (needs theta')."""
        if self.dtheta is None:
            raise ValueError("flux mass function needs theta' values")
        c = (self.m - 1.0) / self.m
        vals = -2.0 * math.pi / c * self.grid.nodes * self.dtheta
        vals = np.where(self.grid.nodes >= self.R, self.M, vals)
        return MassFunction(self.grid, vals, self.M)

    @cached_property
    def _mass_spline(self) -> CubicHermiteSpline:
        # M' = 2 pi r rho is known at every node, so Hermite interpolation is exact to dr^4
        if self.dtheta is None:
            raise ValueError("mass interpolation needs theta' values")
        r = self.grid.nodes
        k = self.grid.last_index_at_or_below(self.R)
        if r[k] >= self.R:
            k -= 1
        c = (self.m - 1.0) / self.m
        x = np.append(r[: k + 1], self.R)
        M = np.append(-2.0 * math.pi / c * r[: k + 1] * self.dtheta[: k + 1], self.M)
        dM = np.append(2.0 * math.pi * r[: k + 1] * self.rho[: k + 1], 0.0)
        return CubicHermiteSpline(x, M, dM)

    def mass_at(self, r) -> np.ndarray:
        """Steady mass function at any radius (cubic Hermite inside, M outside)."""
        r = np.asarray(r, dtype=float)
        inside = self._mass_spline(np.clip(r, 0.0, self.R))
        return np.where(r >= self.R, self.M, inside)

    def rho_at(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        th = np.interp(r, self.grid.nodes, self.theta, right=0.0)
        th = np.where(r >= self.R, 0.0, th)
        return np.maximum(th, 0.0) ** self.exponent


def _from_shot(shot: Shot, M: float | None = None) -> SteadyState:
    from .potential import free_energy  # potential imports this module for typing only

    M = shot.mass if M is None else M
    q = 1 / (shot.m - 1)
    rho = RadialDensity(shot.grid, np.maximum(shot.theta, 0) ** q, M, support=shot.R, edge_exponent=q)
    D = free_energy(rho, shot.m).D_formula
    return SteadyState(shot.m, M, shot.grid, shot.theta, shot.R, shot.theta_c, D, shot.dtheta)


def _shoot_adaptive(m, theta_c, dr, r_max):
    for _ in range(12):
        try:
            return shoot_profile(m, theta_c, dr, r_max)
        except SupportExceedsDomain:
            r_max *= 2.0
    raise SolverError(f"support keeps exceeding the domain (r_max={r_max:.3g})")


def solve_steady(
    m: float,
    M: float,
    tol: float = 1e-10,
    n_support: int = 2048,
    monotone_samples: int = 5,
) -> SteadyState:
    """Steady state of mass M: root search on theta_c for the mass map."""
    _, p = _exponents(m)
    if not M > 0:
        raise ValueError(f"mass must be positive, got M={M}")

    pilot = _shoot_adaptive(m, 1.0, 1.0 / 256, 16.0)
    theta_guess = M / pilot.mass
    R_guess = pilot.R * theta_guess ** ((1.0 - p) / 2.0)
    dr = R_guess / n_support
    r_max = 1.5 * R_guess

    cache: dict[float, Shot] = {}

    def shot_at(tc: float) -> Shot:
        nonlocal r_max
        if tc not in cache:
            s = _shoot_adaptive(m, tc, dr, r_max)
            r_max = max(r_max, s.grid.r_max)
            cache[tc] = s
        return cache[tc]

    def excess(tc: float) -> float:
        return shot_at(tc).mass - M

    lo = hi = theta_guess
    for _ in range(60):
        if excess(lo) <= 0:
            break
        lo *= 0.5
    else:
        raise SolverError("no lower bracket for the central value")
    for _ in range(60):
        if excess(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise SolverError("no upper bracket for the central value")
    if lo == hi:
        lo, hi = lo / 1.25, hi * 1.25

    probes = np.geomspace(lo, hi, monotone_samples)
    masses = [excess(tc) for tc in probes]
    if np.any(np.diff(masses) <= 0):
        raise SolverError(
            "mass map theta_c -> M is not monotone over the bracket "
            f"({lo:.6g}, {hi:.6g}); refine the grid"
        )
    for tc, f in zip(probes, masses):
        if f <= 0:
            lo = max(lo, tc)
        if f >= 0:
            hi = min(hi, tc)

    for _ in range(4):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid

    tc = lo
    for _ in range(50):
        f_lo, f_hi = excess(lo), excess(hi)
        if f_hi == f_lo:
            tc = 0.5 * (lo + hi)
        else:
            tc = lo - f_lo * (hi - lo) / (f_hi - f_lo)
            if not lo < tc < hi:
                tc = 0.5 * (lo + hi)
        f = excess(tc)
        if abs(f) <= tol * M:
            break
        if f < 0:
            lo = tc
        else:
            hi = tc
    else:
        raise SolverError("central value root search did not converge")

    return _from_shot(shot_at(tc), M)


def scaling_exponent(m: float) -> float:
    """Exponent a with theta_R(x) = R**a * theta_1(x/R); mass scales the same way."""
    if abs(m - 2.0) < 0.05:
        raise ValueError(
            f"radius scaling is singular near m = 2 (m={m}); solve directly with solve_steady"
        )
    return 2.0 * (m - 1.0) / (m - 2.0)


def scaling_transform(base: SteadyState, R_new: float) -> SteadyState:
    """Rescale a steady state to support radius ``R_new``.

    ``theta_new(x) = s**a * theta(x / s)`` with ``s = R_new / R`` and
    ``a = 2(m-1)/(m-2)``; the mass picks up the same factor ``s**a``. The
    rescaled profile lives on the base grid stretched by ``s``, so no
    interpolation is involved.
    """
    a = scaling_exponent(base.m)
    s = R_new / base.R
    amp = s**a
    grid = RadialGrid(base.grid.n, base.grid.dr * s)
    dtheta = None if base.dtheta is None else base.dtheta * amp / s
    # u_new(x) = amp * u(x / s) - (M_new / 2 pi) log s
    M_new = base.M * amp
    D_new = amp * base.D + M_new / (2 * math.pi) * math.log(s)
    return SteadyState(base.m, M_new, grid, base.theta * amp, R_new, base.theta_c * amp, D_new, dtheta)


def oscillation_diagnostic(
    m: float, theta_c: float, t_max: float, t_start: float | None = None, rtol: float = 1e-10
) -> list[float]:
    """Zero crossings of w(t) = theta(e^t), continued past every zero.

    Integrates w'' + c e^{2t} |w|^{p-1} w = 0 in the logarithmic variable,
    starting from the power series close to the origin.
    """
    c, p = _exponents(m)
    if t_start is None:
        t_start = math.log(1e-4 * length_scale(m, theta_c))
    if t_max <= t_start:
        return []
    r0 = math.exp(t_start)
    th0, ph0 = series_start(m, theta_c, r0)

    def rhs(t, y):
        w, dw = y
        return [dw, -c * math.exp(2 * t) * math.copysign(abs(w) ** p, w)]

    def crossing(t, y):
        return y[0]

    crossing.direction = 0
    sol = solve_ivp(
        rhs,
        (t_start, t_max),
        [th0, r0 * ph0],
        method="DOP853",
        rtol=rtol,
        atol=rtol * theta_c,
        events=crossing,
    )
    return [float(t) for t in sol.t_events[0]]
