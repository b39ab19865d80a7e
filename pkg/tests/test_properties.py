"""Randomised properties (hypothesis)."""

import json
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ksground import io
from ksground.masspde import barrier_ode
from ksground.radial import RadialDensity, RadialGrid, integrate_radial, is_radially_nonincreasing, lp_norm, mass_function
from ksground.rearrange import Verdict, compare_concentration, rearrange_radial

coef = st.floats(-10, 10, allow_nan=False)
MIRROR = {
    Verdict.Equal: Verdict.Equal,
    Verdict.Crossing: Verdict.Crossing,
    Verdict.LessConcentrated: Verdict.MoreConcentrated,
    Verdict.MoreConcentrated: Verdict.LessConcentrated,
}


@given(a=coef, b=coef, c=coef, n=st.integers(3, 400), r_max=st.floats(0.1, 50))
def test_quadrature_exact_for_quadratics(a, b, c, n, r_max):
    g = RadialGrid.covering(r_max, n)
    r = g.nodes
    got = integrate_radial(a + b * r + c * r * r, g)
    R = g.r_max
    exact = 2 * math.pi * (a * R**2 / 2 + b * R**3 / 3 + c * R**4 / 4)
    scale = 2 * math.pi * (abs(a) * R**2 / 2 + abs(b) * R**3 / 3 + abs(c) * R**4 / 4)
    assert abs(got - exact) <= 1e-12 * max(scale, 1e-300)


nonneg = arrays(np.float64, st.integers(5, 200), elements=st.floats(0, 100, allow_nan=False))


@given(v=nonneg)
def test_mass_function_nondecreasing(v):
    v = v.copy()
    v[-1] = 0.0
    rho = RadialDensity(RadialGrid.covering(1.0, v.size), v)
    mf = mass_function(rho)
    assert np.all(np.diff(mf.values) >= 0) and mf.values[0] == 0


@given(v=nonneg, k=st.floats(0.01, 100))
def test_lp_norm_homogeneous(v, k):
    rho = RadialDensity(RadialGrid.covering(1.0, v.size), v)
    for p in (1.0, 2.0, 3.5):
        base = lp_norm(rho, p)
        assert math.isclose(lp_norm(rho.scaled(k), p), k * base, rel_tol=1e-9, abs_tol=1e-300)


def _bumpy(params, n=801):
    # smooth radial profile with interior bumps, compact in [0, 2]
    g = RadialGrid.covering(2.5, n)
    r = g.nodes
    vals = np.zeros(n)
    for amp, centre, width in params:
        vals += amp * np.exp(-((r - centre) / width) ** 2)
    vals *= np.clip(1 - (r / 2.0) ** 2, 0, None) ** 2
    return RadialDensity(g, vals, support=2.0, edge_exponent=2.0)


bumps = st.lists(
    st.tuples(st.floats(0.1, 3), st.floats(0.0, 1.8), st.floats(0.1, 0.6)), min_size=1, max_size=4
)


@settings(max_examples=40, deadline=None)
@given(params=bumps)
def test_rearrangement_idempotent_and_decreasing(params):
    once = rearrange_radial(_bumpy(params))
    assert is_radially_nonincreasing(once)
    twice = rearrange_radial(once)
    assert np.array_equal(twice.values, once.values)


@settings(max_examples=40, deadline=None)
@given(params=bumps)
def test_rearrangement_equimeasurable(params):
    rho = _bumpy(params)
    out = rearrange_radial(rho)
    assert math.isclose(out.mass, rho.mass, rel_tol=5e-5)
    assert math.isclose(lp_norm(out, 2.0), lp_norm(rho, 2.0), rel_tol=5e-5)


@settings(max_examples=40, deadline=None)
@given(p1=bumps, p2=bumps)
def test_concentration_order_is_antisymmetric(p1, p2):
    a, b = _bumpy(p1), _bumpy(p2)
    ab, ba = compare_concentration(a, b), compare_concentration(b, a)
    assert ba.verdict is MIRROR[ab.verdict]
    assert math.isclose(ab.max_gap, -ba.max_gap, rel_tol=1e-12, abs_tol=1e-15)


@settings(max_examples=60, deadline=None)
@given(k0=st.floats(0.2, 3.0), C=st.floats(0.01, 2.0), m=st.floats(1.2, 4.0), t=st.floats(0.0, 5.0))
def test_barrier_ode_moves_towards_one(k0, C, m, t):
    k = barrier_ode(k0, C, m, t)
    if k0 < 1:
        assert k0 <= k <= 1.0 + 1e-12
    elif k0 > 1:
        assert 1.0 - 1e-12 <= k <= k0
    else:
        assert k == 1.0


json_values = st.recursive(
    st.one_of(st.floats(allow_nan=False, allow_infinity=False), st.integers(-10**6, 10**6), st.booleans(), st.text(max_size=5)),
    lambda kids: st.one_of(st.lists(kids, max_size=4), st.dictionaries(st.text(max_size=4), kids, max_size=4)),
    max_leaves=20,
)


@given(obj=json_values)
def test_json_rounding_is_stable(obj):
    text = io.dumps(obj)
    assert io.dumps(json.loads(text)) == text
