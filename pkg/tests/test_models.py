import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kottler.errors import DomainError
from kottler.mass import surface_gravity
from kottler.models import (BKParameters, GaussGauge, bk_profile, bk_state, check_dimension, critical_radii,
                            deficit, lapse_max, lapse_squared, max_mass, model_slope, nariai_profile,
                            radius_zero)
from oracle_values import BK3, BK4, M_MAX

mass_fraction = st.floats(min_value=1e-6, max_value=1 - 1e-6)
dimension = st.integers(min_value=3, max_value=8)


@pytest.mark.parametrize("n", [3, 4])
def test_max_mass_closed_form(n):
    assert max_mass(n) == pytest.approx(M_MAX[n], abs=1e-15)


@pytest.mark.parametrize("n", [2, 9, 3.5, True])
def test_unsupported_dimension(n):
    with pytest.raises(DomainError):
        check_dimension(n)


@pytest.mark.parametrize("ref", [BK3, BK4], ids=["n3", "n4"])
def test_critical_radii_match_reference(ref):
    rm, rp = critical_radii(ref["n"], ref["m"])
    assert rm == pytest.approx(ref["r_minus"], rel=1e-14)
    assert rp == pytest.approx(ref["r_plus"], rel=1e-14)
    assert radius_zero(ref["n"], ref["m"]) == pytest.approx(ref["r_zero"], rel=1e-15)
    assert lapse_max(ref["n"], ref["m"]) == pytest.approx(ref["u_max"], rel=1e-15)


@pytest.mark.parametrize("m", [0.3, 0.0, -0.1, M_MAX[3]])
def test_mass_out_of_range(m):
    with pytest.raises(DomainError):
        critical_radii(3, m)


@settings(max_examples=60, deadline=None)
@given(dimension, mass_fraction)
def test_roots_ordered_with_small_residual(n, frac):
    m = frac * max_mass(n)
    rm, rp = critical_radii(n, m)
    r0 = radius_zero(n, m)
    assert 0 < rm < r0 < rp < 1
    for r in (rm, rp):
        assert abs(lapse_squared(n, m, r)[0]) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(dimension, mass_fraction)
def test_lapse_maximum_is_stationary(n, frac):
    m = frac * max_mass(n)
    r0 = radius_zero(n, m)
    u2, du2 = lapse_squared(n, m, r0)
    assert abs(du2) <= 1e-12
    assert u2 == pytest.approx(lapse_max(n, m) ** 2, abs=1e-12)


def test_extremal_degeneration():
    m = M_MAX[3] * (1 - 1e-12)
    rm, rp = critical_radii(3, m)
    assert rm == pytest.approx(1 / math.sqrt(3), abs=5e-6)
    assert rp == pytest.approx(1 / math.sqrt(3), abs=5e-6)
    assert lapse_max(3, m) <= 1e-4


def test_de_sitter_limit():
    assert lapse_max(3, 1e-12) == pytest.approx(1.0, abs=1e-7)
    assert critical_radii(3, 1e-6)[1] == pytest.approx(1.0, abs=1e-5)


def test_lapse_squared_at_outer_horizon():
    u2, du2 = lapse_squared(3, 0.1, BK3["r_plus"])
    assert u2 == pytest.approx(0.0, abs=1e-15)
    assert du2 == pytest.approx(BK3["dg_plus"], rel=1e-13)


def test_lapse_squared_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        lapse_squared(3, 0.1, 0.0)


@settings(max_examples=40, deadline=None)
@given(dimension, mass_fraction, st.floats(min_value=-0.45, max_value=0.45))
def test_deficit_and_slope_agree_with_direct_formulas(n, frac, x):
    m = frac * max_mass(n)
    r0 = radius_zero(n, m)
    rho = r0 * (1 + x)
    u2 = lapse_squared(n, m, rho)[0]
    assert lapse_max(n, m) ** 2 - deficit(n, r0, r0 * x) == pytest.approx(u2, abs=1e-13)
    assert model_slope(n, r0, r0 * x) == pytest.approx(-rho + (n - 2) * m * rho ** (1 - n), abs=1e-13)


@pytest.mark.parametrize("ref", [BK3, BK4], ids=["n3", "n4"])
def test_geodesic_distance_to_horizons(ref):
    params = BKParameters(ref["n"], ref["m"])
    assert GaussGauge(params, "plus").horizon_r == pytest.approx(ref["dist_plus"], rel=1e-13)
    assert GaussGauge(params, "minus").horizon_r == pytest.approx(ref["dist_minus"], rel=1e-13)


def test_bk_profile_center_and_ends(bk3, bk3_profile):
    p = bk3_profile
    i = p.origin_index
    assert p.r[i] == 0.0
    assert p.u[i] == pytest.approx(BK3["u_max"], rel=1e-15)
    assert p.v[i] == 0.0
    assert p.rho[i] == pytest.approx(BK3["r_zero"], rel=1e-15)
    assert p.rho[-1] == pytest.approx(BK3["r_plus"], abs=1e-12)
    assert p.rho[0] == pytest.approx(BK3["r_minus"], abs=1e-12)
    assert p.u[0] == 0.0 and p.u[-1] == 0.0
    p.check(constraint_tol=1e-10)


def test_bk_profile_reproduces_lapse_squared(bk3, bk3_profile):
    u2 = lapse_squared(3, 0.1, bk3_profile.rho)[0]
    assert np.max(np.abs(bk3_profile.u**2 - u2)) <= 1e-8


def test_bk_profile_w_tracks_lapse(bk3_profile):
    # drho/dr = u / u_max * w0 with w0 = u_max in the default gauge
    assert np.max(np.abs(bk3_profile.w - bk3_profile.u)) <= 1e-15


def test_bk_profile_gauge_linearity(bk3, bk3_profile):
    doubled = bk_profile(bk3, gauge=2 * bk3.u_max)
    np.testing.assert_allclose(doubled.u, 2 * bk3_profile.u, rtol=1e-15, atol=0)
    np.testing.assert_allclose(doubled.v, 2 * bk3_profile.v, rtol=1e-15, atol=0)
    np.testing.assert_array_equal(doubled.rho, bk3_profile.rho)
    np.testing.assert_array_equal(doubled.w, bk3_profile.w)


def test_bk_profile_rejects_near_extremal():
    with pytest.raises(DomainError):
        bk_profile(BKParameters(3, M_MAX[3] * (1 - 1e-7)))


def test_bk_state_surface_gravity_matches_closed_form(bk3):
    # |v| at the horizon, divided by u_max, is the normalized surface gravity
    rho, u, v, w = bk_state(bk3, BK3["dist_plus"] * (1 - 1e-15))
    assert abs(v) / bk3.u_max == pytest.approx(surface_gravity(3, 0.1, "plus").k, abs=1e-6)


def test_nariai_profile(nariai3):
    p = nariai3
    assert np.all(p.rho == pytest.approx(math.sqrt(1 / 3)))
    assert np.all(p.w == 0)
    assert abs(p.v[0]) / p.gauge == pytest.approx(math.sqrt(3), abs=1e-8)
    assert abs(p.u[0]) <= 1e-15 and abs(p.u[-1]) <= 1e-15
    # u'' = -n u through second differences on the uniform grid
    h = p.r[1] - p.r[0]
    upp = (p.u[2:] - 2 * p.u[1:-1] + p.u[:-2]) / h**2
    assert np.max(np.abs(upp + 3 * p.u[1:-1])) <= 1e-3
    assert np.max(np.abs(p.c_res)) <= 1e-15
