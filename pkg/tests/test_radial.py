import math

import numpy as np
import pytest

from ksground.radial import (
    RadialDensity,
    RadialGrid,
    integrate_radial,
    is_radially_nonincreasing,
    lp_norm,
    mass_function,
    uniform_disk,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(2, 0.1)
    with pytest.raises(ValueError):
        RadialGrid(10, 0.0)
    g = RadialGrid.covering(2.0, 11)
    assert g.dr == pytest.approx(0.2) and g.r_max == pytest.approx(2.0)


def test_grid_from_nodes_roundtrip_and_rejects_nonuniform():
    g = RadialGrid.covering(3.0, 31)
    assert RadialGrid.from_nodes(g.nodes) == g
    bad = g.nodes.copy()
    bad[5] += 1e-3
    with pytest.raises(ValueError):
        RadialGrid.from_nodes(bad)
    with pytest.raises(ValueError):
        RadialGrid.from_nodes(g.nodes + 0.5)


@pytest.mark.parametrize("n", [3, 4, 5, 8, 101, 102])
def test_quadratic_integrands_exact(n):
    # both even and odd interval counts (Simpson and the 3/8 tail)
    g = RadialGrid.covering(1.7, n)
    r = g.nodes
    f = 2.0 - 0.5 * r + 3.0 * r * r
    R = g.r_max
    exact = 2 * math.pi * (2.0 * R**2 / 2 - 0.5 * R**3 / 3 + 3.0 * R**4 / 4)
    assert integrate_radial(f, g) == pytest.approx(exact, rel=1e-13)


def test_partial_cell_upper_limit_converges():
    errs = []
    for n in (101, 201, 401):
        g = RadialGrid.covering(2.0, n)
        f = np.cos(g.nodes)
        upper = 1.2345
        exact = 2 * math.pi * (upper * math.sin(upper) + math.cos(upper) - 1.0)
        errs.append(abs(integrate_radial(f, g, upper) - exact))
    assert errs[2] < errs[1] < errs[0]
    assert math.log2(errs[1] / errs[2]) > 3.0


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        integrate_radial(np.ones(5), RadialGrid.covering(1.0, 6))


def test_density_rejects_negative_and_mass_mismatch():
    g = RadialGrid.covering(1.0, 11)
    with pytest.raises(ValueError):
        RadialDensity(g, -np.ones(11))
    with pytest.raises(ValueError):
        RadialDensity(g, np.ones(11), declared_mass=1.0)


def test_density_zeroes_beyond_support():
    g = RadialGrid.covering(2.0, 21)
    rho = RadialDensity(g, np.ones(21), support=1.05)
    assert np.all(rho.values[g.nodes > 1.05] == 0)
    assert rho.mass == pytest.approx(math.pi * 1.05**2, rel=1e-12)


def test_uniform_disk_norms():
    g = RadialGrid.covering(3.0, 601)
    c, R, m = 0.4, 1.77, 2.5
    rho = uniform_disk(g, c, R)
    assert lp_norm(rho, 1) == pytest.approx(rho.mass, rel=1e-12)
    assert lp_norm(rho, m) == pytest.approx(c * (math.pi * R * R) ** (1 / m), rel=1e-12)
    assert lp_norm(rho.scaled(2.0), m) == pytest.approx(2 * lp_norm(rho, m), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(rho, 0.5)


def test_mass_function_of_disk():
    g = RadialGrid.covering(2.0, 401)
    rho = uniform_disk(g, 1.0, 1.0)
    mf = mass_function(rho)
    r = np.array([0.25, 0.5, 0.99, 1.5, 5.0])
    expected = np.where(r < 1, math.pi * r * r, math.pi)
    assert np.allclose(mf(r), expected, rtol=1e-4, atol=1e-6)
    assert np.all(np.diff(mf.values) >= 0)


def test_nonincreasing_predicate():
    g = RadialGrid.covering(1.0, 11)
    assert is_radially_nonincreasing(uniform_disk(g, 1.0, 0.5))
    ramp = RadialDensity(g, g.nodes.copy())
    assert not is_radially_nonincreasing(ramp)
    assert is_radially_nonincreasing(ramp, tol=0.2)
