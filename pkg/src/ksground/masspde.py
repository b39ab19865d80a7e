"""Radial evolution written for the cumulative mass M(r, t) = int_{B_r} rho.

With rho = M_r / (2 pi r) and the radial potential gradient -M / (2 pi r),

    M_t = 2 pi r rho v,   v = (m/(m-1)) d_r rho^(m-1) + M / (2 pi r),

where v is the inward transport velocity. v vanishes on the support of a
steady state. The discretisation keeps M at the nodes r_i = i dr, densities
as annulus averages between nodes, and uses upwind values of rho at each
node. Time stepping is Heun's method (explicit RK2) with M(0) = 0 and
M(R_max) = total held fixed.

Sub/supersolutions are rescaled steady states k^2 rho0(k r) whose factor
obeys k' = C k^3 (1 - k^(2(m-1))); their mass is M0(k r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .config import DEFAULT
from .radial import MassFunction, RadialDensity, RadialGrid, mass_function
from .steady import SteadyState

TWO_PI = 2.0 * math.pi


class EvolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionState:
    grid: RadialGrid
    M: np.ndarray
    t: float
    m: float
    total: float

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} mass values, got shape {M.shape}")
        tol = DEFAULT.monotone_abs * max(self.total, 1.0)
        if abs(M[0]) > tol or abs(M[-1] - self.total) > 1e-10 * max(self.total, 1.0):
            raise ValueError("mass function must vanish at r = 0 and equal the total at R_max")
        if np.any(np.diff(M) < -tol):
            raise EvolutionError("mass function lost monotonicity")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    def mass_function(self) -> MassFunction:
        return MassFunction(self.grid, self.M, self.total)


def density_to_mass(rho: RadialDensity, m: float, grid: RadialGrid | None = None) -> EvolutionState:
    """Cumulative mass of ``rho`` at the nodes of ``grid`` (default: rho's own grid)."""
    grid = rho.grid if grid is None else grid
    total = rho.mass
    vals = np.clip(mass_function(rho)(grid.nodes), 0.0, total)
    vals[0] = 0.0
    vals[-1] = total
    return EvolutionState(grid, np.maximum.accumulate(vals), 0.0, m, total)


def mass_to_density(state: EvolutionState, tol: float = 1e-10) -> RadialDensity:
    """Node densities M_r / (2 pi r): centred differences inside, one-sided at
    the outer end, and M(r_1) / (pi r_1^2) at the origin."""
    g, M = state.grid, state.M
    r = g.nodes
    rho = np.empty(g.n)
    rho[1:-1] = (M[2:] - M[:-2]) / (2 * g.dr * TWO_PI * r[1:-1])
    rho[-1] = (3 * M[-1] - 4 * M[-2] + M[-3]) / (2 * g.dr * TWO_PI * r[-1])
    rho[0] = M[1] / (math.pi * r[1] ** 2)
    floor = -tol * max(np.max(np.abs(rho)), 1e-300)
    if np.any(rho < floor):
        raise EvolutionError(f"negative density {rho.min():.3e} recovered from the mass function")
    return RadialDensity(g, np.maximum(rho, 0.0))


def _cell_density(grid: RadialGrid, M: np.ndarray) -> np.ndarray:
    r = grid.nodes
    return np.diff(M) / (math.pi * (r[1:] ** 2 - r[:-1] ** 2))


def _rhs(grid: RadialGrid, M: np.ndarray, m: float):
    """dM/dt at the nodes and the node velocities."""
    r = grid.nodes
    rho_c = np.maximum(_cell_density(grid, M), 0.0)
    theta_c = rho_c ** (m - 1.0)
    v = np.zeros(grid.n)
    v[1:-1] = m / (m - 1.0) * np.diff(theta_c) / grid.dr + M[1:-1] / (TWO_PI * r[1:-1])
    # inward velocity carries mass from the outer cell
    up = np.where(v[1:-1] > 0, rho_c[1:], rho_c[:-1])
    dM = np.zeros(grid.n)
    dM[1:-1] = TWO_PI * r[1:-1] * up * v[1:-1]
    return dM, v, rho_c


@dataclass(frozen=True)
class StepController:
    """Time step policy: dt <= diffusion * dr^2 / (m max rho^(m-1)) and
    dt <= cfl * dr / max|v|."""

    diffusion: float = 0.2
    cfl: float = 0.5
    eps: float = 1e-14

    def dt(self, state: EvolutionState) -> float:
        _, v, rho_c = _rhs(state.grid, state.M, state.m)
        dr = state.grid.dr
        d = state.m * float(np.max(rho_c ** (state.m - 1.0)))
        return min(self.diffusion * dr * dr / (d + self.eps), self.cfl * dr / (float(np.max(np.abs(v))) + self.eps))


def step(state: EvolutionState, dt: float, controller: StepController = StepController()) -> EvolutionState:
    """One Heun step. Steps above the controller bound raise."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    bound = controller.dt(state)
    if dt > bound * (1 + 1e-12):
        raise EvolutionError(f"time step {dt:.3e} exceeds the stability bound {bound:.3e}")
    return _heun(state, dt)


def _heun(state: EvolutionState, dt: float) -> EvolutionState:
    g, m = state.grid, state.m
    k1, _, _ = _rhs(g, state.M, m)
    M1 = state.M + dt * k1
    k2, _, _ = _rhs(g, M1, m)
    M_new = state.M + 0.5 * dt * (k1 + k2)
    M_new[0], M_new[-1] = 0.0, state.total
    return EvolutionState(g, M_new, state.t + dt, m, state.total)


@njit(cache=True)
def _rhs_nb(M, r, dr, m, dM, v, rho_c):
    n = M.size
    for j in range(n - 1):
        x = (M[j + 1] - M[j]) / (np.pi * (r[j + 1] ** 2 - r[j] ** 2))
        rho_c[j] = x if x > 0.0 else 0.0
    f = m / (m - 1.0)
    dM[0] = 0.0
    dM[n - 1] = 0.0
    v[0] = 0.0
    v[n - 1] = 0.0
    for i in range(1, n - 1):
        vi = f * (rho_c[i] ** (m - 1.0) - rho_c[i - 1] ** (m - 1.0)) / dr + M[i] / (2.0 * np.pi * r[i])
        v[i] = vi
        up = rho_c[i] if vi > 0.0 else rho_c[i - 1]
        dM[i] = 2.0 * np.pi * r[i] * up * vi


@njit(cache=True)
def _advance_nb(M, r, dr, m, total, t, t_end, diffusion, cfl, eps, mono_tol, max_steps):
    """Heun steps from t to t_end in place. Returns (t, steps, status); status
    1 flags lost monotonicity, 2 the step budget."""
    n = M.size
    k1 = np.empty(n)
    k2 = np.empty(n)
    v = np.empty(n)
    rho_c = np.empty(n - 1)
    M1 = np.empty(n)
    steps = 0
    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        if steps >= max_steps:
            return t, steps, 2
        _rhs_nb(M, r, dr, m, k1, v, rho_c)
        dmax = 0.0
        for j in range(n - 1):
            th = rho_c[j] ** (m - 1.0)
            if th > dmax:
                dmax = th
        vmax = 0.0
        for i in range(n):
            if abs(v[i]) > vmax:
                vmax = abs(v[i])
        dt = min(diffusion * dr * dr / (m * dmax + eps), cfl * dr / (vmax + eps))
        if t_end - t < dt:
            dt = t_end - t
        for i in range(n):
            M1[i] = M[i] + dt * k1[i]
        _rhs_nb(M1, r, dr, m, k2, v, rho_c)
        for i in range(n):
            M[i] = M[i] + 0.5 * dt * (k1[i] + k2[i])
        M[0] = 0.0
        M[n - 1] = total
        for i in range(n - 1):
            if M[i + 1] - M[i] < -mono_tol:
                return t + dt, steps + 1, 1
        t += dt
        steps += 1
    return t, steps, 0


@dataclass(frozen=True)
class EvolutionRun:
    states: list
    distances: list  # sup_r |M - M0| per checkpoint; empty without a reference
    reference: SteadyState | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def sup_distance(state: EvolutionState, reference: SteadyState) -> float:
    return float(np.max(np.abs(state.M - reference.mass_at(state.grid.nodes))))


def evolve(
    state: EvolutionState,
    T: float,
    controller: StepController = StepController(),
    checkpoints=10,
    reference: SteadyState | None = None,
    max_steps: int = 50_000_000,
) -> EvolutionRun:
    """Advance to time ``state.t + T``, recording the state at checkpoints.

    Uses the same Heun update as :func:`step`, with the controller's step
    size recomputed every step, in a compiled loop.

    ``checkpoints`` is a count of equally spaced times or an explicit list of
    times relative to the start. The initial state is always recorded first.
    """
    if not T > 0:
        raise ValueError(f"run length must be positive, got {T}")
    t0 = state.t
    if np.isscalar(checkpoints):
        marks = np.linspace(0.0, T, int(checkpoints) + 1)[1:]
    else:
        marks = np.asarray(sorted(checkpoints), dtype=float)
        if marks.size == 0 or marks[0] <= 0 or marks[-1] > T * (1 + 1e-12):
            raise ValueError("checkpoint times must lie in (0, T]")
    states = [state]
    g = state.grid
    r = g.nodes
    M = np.array(state.M, dtype=float)
    t = t0
    mono_tol = DEFAULT.monotone_abs * max(state.total, 1.0)
    for mark in marks:
        target = t0 + mark
        t, _, status = _advance_nb(
            M, r, g.dr, float(state.m), float(state.total), t, target,
            controller.diffusion, controller.cfl, controller.eps, mono_tol, max_steps,
        )
        if status == 1:
            raise EvolutionError(f"mass function lost monotonicity at t={t:.6g}")
        if status == 2:
            raise EvolutionError(f"step budget of {max_steps} exhausted before t={target:.6g}")
        states.append(EvolutionState(g, M.copy(), target, state.m, state.total))
    dists = [] if reference is None else [sup_distance(s, reference) for s in states]
    return EvolutionRun(states, dists, reference)


def evolution_grid(s: SteadyState, n: int = 601, factor: float = 3.0) -> RadialGrid:
    """Default domain [0, factor * R] with ``n`` nodes."""
    return RadialGrid.covering(factor * s.R, n)


def steady_initial(s: SteadyState, grid: RadialGrid, a: float = 1.0) -> EvolutionState:
    """Mass function of a^2 rho0(a r), which is M0(a r); a = 1 is the steady state."""
    if not a > 0:
        raise ValueError(f"scale factor must be positive, got {a}")
    if s.R / a >= grid.r_max:
        raise ValueError(f"scaled support {s.R / a:.6g} does not fit in R_max={grid.r_max:.6g}")
    M = s.mass_at(a * grid.nodes)
    M[0], M[-1] = 0.0, s.M
    return EvolutionState(grid, M, 0.0, s.m, s.M)


def disk_initial(m: float, M: float, radius: float, grid: RadialGrid) -> EvolutionState:
    if not 0 < radius < grid.r_max:
        raise ValueError(f"disk radius must lie in (0, {grid.r_max:.6g})")
    vals = M * np.minimum(grid.nodes / radius, 1.0) ** 2
    return EvolutionState(grid, vals, 0.0, m, M)


# --- barriers ----------------------------------------------------------------

def _k_rhs(k, C, m):
    return C * k**3 * (1.0 - k ** (2.0 * (m - 1.0)))


def barrier_ode(k0: float, C: float, m: float, t, h_max: float | None = None):
    """k(t) for k' = C k^3 (1 - k^(2(m-1))), k(0) = k0, by classical RK4.

    ``t`` may be a scalar or a nondecreasing array of nonnegative times.
    """
    if not k0 > 0 or not C > 0:
        raise ValueError("barrier ODE needs k0 > 0 and C > 0")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0) or np.any(np.diff(ts) < 0):
        raise ValueError("times must be nonnegative and nondecreasing")
    if h_max is None:
        h_max = 0.02 / (C * max(k0, 1.0) ** 2 * max(2.0 * (m - 1.0), 1.0))
    out = np.empty(ts.size)
    k, now = float(k0), 0.0
    for j, target in enumerate(ts):
        span = target - now
        if span > 0:
            n = max(1, int(math.ceil(span / h_max)))
            h = span / n
            for _ in range(n):
                a1 = _k_rhs(k, C, m)
                a2 = _k_rhs(k + 0.5 * h * a1, C, m)
                a3 = _k_rhs(k + 0.5 * h * a2, C, m)
                a4 = _k_rhs(k + h * a3, C, m)
                k += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
            now = target
        out[j] = k
    return float(out[0]) if np.isscalar(t) else out


@dataclass(frozen=True)
class Barrier:
    kind: str  # "sub" or "super"
    k: float  # scaling factor at time 0 of this barrier
    C: float
    base: SteadyState = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("sub", "super"):
            raise ValueError(f"barrier kind must be 'sub' or 'super', got {self.kind!r}")
        if self.kind == "sub" and not 0 < self.k <= 1:
            raise ValueError("a sub-barrier needs k in (0, 1]")
        if self.kind == "super" and not self.k >= 1:
            raise ValueError("a super-barrier needs k >= 1")
        if not self.C > 0:
            raise ValueError("rate constant must be positive")

    def k_at(self, t):
        return barrier_ode(self.k, self.C, self.base.m, t)


def barrier_mass(b: Barrier, t: float) -> MassFunction:
    """M_phi(r, t) = M0(k(t) r), tabulated on the base grid stretched by 1/k."""
    k = b.k_at(t)
    g = b.base.grid
    vals = b.base.mass_at(g.nodes)
    return MassFunction(RadialGrid(g.n, g.dr / k), vals, b.base.M)


def concentration_constants(s) -> tuple[float, float]:
    """(C1, C2): infimum and supremum of M(r) / (2 pi r^2) over the support.

    Accepts a SteadyState or a RadialDensity. The ratio must be
    nonincreasing; the infimum is then the value at the edge and the
    supremum the limit rho(0) / 2.
    """
    if isinstance(s, SteadyState):
        R, M, rho0 = s.R, s.M, float(s.rho[0])
        mf = s.mass_at
        grid = s.grid
    else:
        R, M, rho0 = s.support_radius(), s.mass, float(s.values[0])
        mf = mass_function(s)
        grid = s.grid
    r = grid.nodes[(grid.nodes > 0) & (grid.nodes <= R)]
    ratio = mf(r) / (TWO_PI * r * r)
    slack = 1e-6 * max(rho0, 1e-300) + 2 * grid.dr / R * rho0
    if np.any(np.diff(ratio) > slack):
        raise ValueError("concentration ratio M(r)/(2 pi r^2) is not nonincreasing")
    return M / (TWO_PI * R * R), 0.5 * rho0


@dataclass(frozen=True)
class MonitorReport:
    holds: bool
    worst_lower: float  # min over checkpoints and r of M_rho - M_sub (should be >= -tol)
    worst_upper: float  # min of M_super - M_rho
    tol: float
    initial_order: tuple  # verdicts (sub vs init, init vs super)
    margins: list  # per checkpoint (t, lower, upper)


def comparison_monitor(
    run: EvolutionRun, sub: Barrier, sup: Barrier, tol: float = DEFAULT.ordering_rtol
) -> MonitorReport:
    """Check M_sub <= M_rho <= M_super at every checkpoint, within tol * total."""
    from .rearrange import compare_concentration

    first = run.states[0]
    band = tol * first.total
    t0 = first.t
    margins = []
    for st in run.states:
        r = st.grid.nodes
        lo = float(np.min(st.M - barrier_mass(sub, st.t - t0)(r)))
        hi = float(np.min(barrier_mass(sup, st.t - t0)(r) - st.M))
        margins.append((float(st.t), lo, hi))
    worst_lo = min(x[1] for x in margins)
    worst_hi = min(x[2] for x in margins)
    init = (
        compare_concentration(barrier_mass(sub, 0.0), first.mass_function(), tol).verdict.value,
        compare_concentration(first.mass_function(), barrier_mass(sup, 0.0), tol).verdict.value,
    )
    holds = worst_lo >= -band and worst_hi >= -band
    return MonitorReport(bool(holds), worst_lo, worst_hi, band, init, margins)


@dataclass(frozen=True)
class RateFit:
    lambda_fit: float
    r_squared: float
    lambda_theory: float
    n_points: int
    verdict: str  # "fit", "inconclusive" or "skipped"


def convergence_rate(
    run: EvolutionRun, s: SteadyState, t_min: float | None = None, floor: float | None = None
) -> RateFit:
    """Least-squares slope of log sup-distance against t over the tail.

    The tail starts at ``t_min`` (default a quarter of the run) and keeps
    checkpoints whose distance exceeds ``floor`` (default 1e-6 M). Fewer
    than 10 usable points skips the fit; r^2 < 0.9 marks it inconclusive.
    """
    C1, _ = concentration_constants(s)
    lam_th = 2.0 * (s.m - 1.0) * C1
    t = run.times
    d = np.asarray(run.distances if run.distances else [sup_distance(x, s) for x in run.states])
    t_min = t[0] + 0.25 * (t[-1] - t[0]) if t_min is None else t_min
    floor = 1e-6 * s.M if floor is None else floor
    use = (t >= t_min) & (d > floor)
    n = int(use.sum())
    if n < 10:
        return RateFit(float("nan"), float("nan"), lam_th, n, "skipped")
    x, y = t[use], np.log(d[use])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return RateFit(float(-slope), r2, lam_th, n, "fit" if r2 >= 0.9 else "inconclusive")


def velocity_field(rho: RadialDensity, m: float):
    """(r, v) with v = (m/(m-1)) d_r rho^(m-1) + M(r) / (2 pi r) on nodes whose
    centred stencil lies inside the support."""
    g = rho.grid
    R = rho.support_radius()
    r = g.nodes
    theta = rho.values ** (m - 1.0)
    M = mass_function(rho).values
    idx = np.nonzero((r > 0) & (r + g.dr <= R * (1 + 1e-12)))[0]
    idx = idx[idx < g.n - 1]
    dth = (theta[idx + 1] - theta[idx - 1]) / (2 * g.dr)
    return r[idx], m / (m - 1.0) * dth + M[idx] / (TWO_PI * r[idx])


def scaled_density(s: SteadyState, a: float, n: int | None = None) -> RadialDensity:
    """a^2 rho0(a r) on a grid reaching 1.5 R / a."""
    n = s.grid.n if n is None else n
    R_a = s.R / a
    grid = RadialGrid.covering(1.5 * R_a, n)
    vals = a * a * s.rho_at(a * grid.nodes)
    return RadialDensity(grid, vals, s.M, support=R_a, edge_exponent=s.exponent)
