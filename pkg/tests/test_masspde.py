import math

import numpy as np
import pytest

from ksground.masspde import (
    Barrier,
    EvolutionError,
    EvolutionState,
    StepController,
    barrier_mass,
    barrier_ode,
    comparison_monitor,
    concentration_constants,
    convergence_rate,
    density_to_mass,
    disk_initial,
    evolution_grid,
    evolve,
    mass_to_density,
    scaled_density,
    step,
    steady_initial,
    velocity_field,
)
from ksground.radial import RadialDensity, RadialGrid, uniform_disk

from . import oracles


def test_disk_round_trip():
    g = RadialGrid.covering(2.0, 2001)
    disk = uniform_disk(g, 0.7, 1.0)
    back = mass_to_density(density_to_mass(disk, 2.0))
    inside = g.nodes < 0.99
    assert np.allclose(back.values[inside], 0.7, rtol=1e-6)
    assert np.all(back.values[g.nodes > 1.01] <= 1e-12)


def test_steady_round_trip(steady_m2):
    s = steady_m2
    state = steady_initial(s, s.grid)
    back = mass_to_density(state)
    err = np.abs(back.values - s.rho)
    assert np.max(err[s.grid.nodes < 0.98 * s.R]) <= 1e-6 * s.rho[0]
    # centred differences straddle the kink at R: one cell's worth of slope there
    assert np.max(err) <= np.max(np.abs(np.diff(s.rho)))


def test_zero_density_gives_zero_mass():
    g = RadialGrid.covering(1.0, 11)
    state = density_to_mass(RadialDensity(g, np.zeros(11)), 2.0)
    assert np.all(state.M == 0)


def test_state_validation():
    g = RadialGrid.covering(1.0, 5)
    with pytest.raises(ValueError):
        EvolutionState(g, np.array([0.1, 0.2, 0.3, 0.4, 1.0]), 0.0, 2.0, 1.0)
    with pytest.raises(EvolutionError):
        EvolutionState(g, np.array([0.0, 0.5, 0.4, 0.9, 1.0]), 0.0, 2.0, 1.0)


def test_single_step_of_steady_state(steady_m2):
    s = steady_m2
    state = steady_initial(s, evolution_grid(s))
    ctrl = StepController()
    new = step(state, ctrl.dt(state), ctrl)
    assert np.max(np.abs(new.M - state.M)) <= 1e-8 * s.M
    with pytest.raises(EvolutionError):
        step(state, 10 * ctrl.dt(state), ctrl)
    with pytest.raises(ValueError):
        step(state, 0.0, ctrl)


def test_steady_state_stays_put(steady_m2):
    s = steady_m2
    run = evolve(steady_initial(s, evolution_grid(s)), 1.0, reference=s)
    assert max(run.distances) <= 1e-6 * s.M
    fit = convergence_rate(run, s)
    assert fit.verdict == "skipped"


def test_mass_conserved_and_monotone():
    g = RadialGrid.covering(6.0, 301)
    run = evolve(disk_initial(2.0, 1.0, 2.0, g), 5.0, checkpoints=5)
    for st in run.states:
        assert st.M[-1] == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(st.M) >= -1e-12)


def test_disk_relaxes_towards_steady_state():
    from ksground.steady import solve_steady

    s = solve_steady(2.0, 1.0)
    g = evolution_grid(s, 301)
    run = evolve(disk_initial(2.0, 1.0, 2.0, g), 200.0, checkpoints=20, reference=s)
    assert run.distances[-1] < 0.1 * run.distances[0]


def test_evolve_argument_checks(steady_m2):
    state = steady_initial(steady_m2, evolution_grid(steady_m2, 101))
    with pytest.raises(ValueError):
        evolve(state, 0.0)
    with pytest.raises(ValueError):
        evolve(state, 1.0, checkpoints=[2.0])
    with pytest.raises(ValueError):
        steady_initial(steady_m2, steady_m2.grid, 0.2)


def test_barrier_ode_equilibrium_and_rate():
    assert barrier_ode(1.0, 1.0, 2.0, 5.0) == 1.0
    t = np.linspace(0, 10, 101)
    k = barrier_ode(0.8, 1.0, 2.0, t)
    assert np.all(np.diff(k) > 0) and k[-1] < 1.0
    tail = t > 4
    rate = -np.polyfit(t[tail], np.log(1.0 - k[tail]), 1)[0]
    assert rate == pytest.approx(2.0, rel=0.05)
    with pytest.raises(ValueError):
        barrier_ode(0.0, 1.0, 2.0, 1.0)


def test_barrier_validation(steady_m2):
    with pytest.raises(ValueError):
        Barrier("sub", 1.2, 1.0, steady_m2)
    with pytest.raises(ValueError):
        Barrier("super", 0.8, 1.0, steady_m2)
    with pytest.raises(ValueError):
        Barrier("side", 1.0, 1.0, steady_m2)
    b = Barrier("sub", 0.8, 0.1, steady_m2)
    mf = barrier_mass(b, 0.0)
    r = np.linspace(0, 2, 9)
    assert np.allclose(mf(r), steady_m2.mass_at(0.8 * r), atol=1e-6)


def test_concentration_constants(steady_m2):
    C1, C2 = concentration_constants(steady_m2)
    assert C1 == pytest.approx(1 / (2 * math.pi * oracles.BESSEL_RADIUS**2), rel=1e-6)
    assert C1 == pytest.approx(0.01376, abs=1e-5)
    assert C2 == pytest.approx(steady_m2.rho[0] / 2)
    g = RadialGrid.covering(3.0, 301)
    with pytest.raises(ValueError):
        concentration_constants(RadialDensity(g, np.where(g.nodes < 2, g.nodes, 0.0), support=2.0))


def test_lambda_theory_scales_with_mass():
    from ksground.steady import solve_steady

    s1, s4 = solve_steady(2.0, 1.0), solve_steady(2.0, 4.0)
    assert concentration_constants(s4)[0] == pytest.approx(4 * concentration_constants(s1)[0], rel=1e-6)


def test_monitor_on_steady_run(steady_m2):
    s = steady_m2
    C1, _ = concentration_constants(s)
    run = evolve(steady_initial(s, evolution_grid(s)), 2.0, checkpoints=4)
    rep = comparison_monitor(run, Barrier("sub", 0.8, C1, s), Barrier("super", 1.25, C1, s))
    assert rep.holds and rep.initial_order == ("LessConcentrated", "LessConcentrated")


def test_monitor_reports_violation_without_raising(steady_m2):
    s = steady_m2
    C1, _ = concentration_constants(s)
    run = evolve(steady_initial(s, evolution_grid(s), 0.7), 1.0, checkpoints=2)
    rep = comparison_monitor(run, Barrier("sub", 0.9, C1, s), Barrier("super", 1.1, C1, s))
    assert not rep.holds and rep.worst_lower < -rep.tol


def test_velocity_field_signs(steady_m2):
    s = steady_m2
    _, v0 = velocity_field(s.density(), 2.0)
    assert np.max(np.abs(v0)) <= 1e-4 * s.M
    _, v1 = velocity_field(scaled_density(s, 1.0), 2.0)
    assert np.max(np.abs(v1)) <= 1e-4 * s.M
    r, v = velocity_field(scaled_density(s, 0.8), 2.0)
    assert np.min(v) >= -1e-6 * s.M
    a = 0.8
    expected = s.mass_at(a * r) / (2 * math.pi * r) * (1 - a**2)
    assert np.allclose(v, expected, atol=1e-4 * s.M)
