import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kottler.errors import DomainError, EndpointLimitError
from kottler.models import critical_radii, lapse_max, lapse_squared, max_mass, radius_zero
from kottler.pseudo_radial import (ENDPOINT_TOL, gradient_ratio, model_gradient, nariai_profile_ratios,
                                   nariai_ratio, profile_ratios, psi, w_functional)
from oracle_values import BK3, MODEL_GRADIENT_AT_PSI_OUTER, PSI3_U05, RATIO_GRAD_04, W_ZERO_GRADIENT


@pytest.mark.parametrize("branch", ["outer", "inner"])
def test_psi_reference(branch):
    assert psi(3, 0.1, 0.5, branch) == pytest.approx(PSI3_U05[branch], rel=1e-14)


def test_psi_boundary_values():
    umax = lapse_max(3, 0.1)
    assert psi(3, 0.1, umax, "outer") == psi(3, 0.1, umax, "inner") == pytest.approx(BK3["r_zero"], rel=1e-15)
    assert psi(3, 0.1, 0.0, "outer") == pytest.approx(BK3["r_plus"], rel=1e-15)
    assert psi(3, 0.1, 0.0, "inner") == pytest.approx(BK3["r_minus"], rel=1e-15)


@pytest.mark.parametrize("u", [-0.1, 0.6, math.nan])
def test_psi_rejects_out_of_range(u):
    with pytest.raises(DomainError):
        psi(3, 0.1, u, "outer")


def test_psi_rejects_bad_branch_and_mass():
    with pytest.raises(DomainError):
        psi(3, 0.1, 0.5, "middle")
    with pytest.raises(DomainError):
        psi(3, 0.3, 0.5, "outer")


@pytest.mark.parametrize("n, frac", [(3, 0.05), (5, 0.5), (8, 0.95)])
def test_psi_monotone_in_u(n, frac):
    m = frac * max_mass(n)
    us = np.linspace(0, lapse_max(n, m), 1000)
    outer = np.array([psi(n, m, u, "outer") for u in us])
    inner = np.array([psi(n, m, u, "inner") for u in us])
    assert np.all(np.diff(outer) < 0)
    assert np.all(np.diff(inner) > 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 8), st.floats(1e-3, 1 - 1e-3), st.floats(0, 1), st.sampled_from(["outer", "inner"]))
def test_psi_inverts_lapse_squared(n, frac, t, branch):
    m = frac * max_mass(n)
    u = t * lapse_max(n, m)
    assert lapse_squared(n, m, psi(n, m, u, branch))[0] == pytest.approx(u * u, abs=1e-10)


def test_model_gradient_examples():
    assert model_gradient(3, 0.1, PSI3_U05["outer"]) == pytest.approx(MODEL_GRADIENT_AT_PSI_OUTER, rel=1e-13)
    assert model_gradient(3, 0.1, BK3["r_zero"]) == pytest.approx(0.0, abs=1e-15)
    assert model_gradient(3, 0.1, BK3["r_plus"]) == pytest.approx(BK3["u_max"] * BK3["k_plus"], rel=1e-13)
    with pytest.raises(DomainError):
        model_gradient(3, 0.1, 0.95)


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 8), st.floats(1e-3, 1 - 1e-3), st.floats(0, 1))
def test_model_gradient_two_closed_forms_agree(n, frac, t):
    m = frac * max_mass(n)
    rm, rp = critical_radii(n, m)
    p = rm + t * (rp - rm)
    assert model_gradient(n, m, p) == pytest.approx(abs(-p + (n - 2) * m * p ** (1 - n)), abs=1e-12)


def test_gradient_ratio_and_w_examples():
    assert gradient_ratio(3, 0.1, 0.5, 0.4, "outer") == pytest.approx(RATIO_GRAD_04, rel=1e-13)
    assert gradient_ratio(3, 0.1, 0.5, 0.0, "outer") == 0.0
    assert w_functional(3, 0.1, 0.5, 0.0, "outer") == pytest.approx(W_ZERO_GRADIENT, rel=1e-13)


@pytest.mark.parametrize("u", [0.0, ENDPOINT_TOL / 2, BK3["u_max"], BK3["u_max"] - ENDPOINT_TOL / 2])
def test_endpoint_limits_are_refused(u):
    with pytest.raises(EndpointLimitError):
        gradient_ratio(3, 0.1, u, 0.1, "outer")
    with pytest.raises(EndpointLimitError):
        w_functional(3, 0.1, u, 0.01, "inner")


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0, 2), st.sampled_from(["outer", "inner"]))
def test_w_sign_matches_ratio(t, g, branch):
    u = t * BK3["u_max"]
    ratio = gradient_ratio(3, 0.1, u, g, branch)
    w = w_functional(3, 0.1, u, g * g, branch)
    assert (w >= 0) == (ratio <= 1) or abs(ratio - 1) < 1e-12


def test_bk_profile_saturates_estimate(bk3_profile):
    rows = profile_ratios(bk3_profile)
    assert len(rows) > 700
    assert max(abs(r[3] - 1) for r in rows) <= 1e-8
    assert max(abs(r[4]) for r in rows) <= 1e-8


def test_w_vanishes_towards_maximum(bk3):
    from kottler.models import bk_state
    ws = []
    for r in (1e-2, 1e-3, 1e-4):
        _, u, v, _ = bk_state(bk3, r)
        ws.append(w_functional(3, 0.1, u, v * v, "outer"))
    assert all(abs(w) < 1e-6 for w in ws)


def test_nariai_ratio_examples(nariai3):
    assert nariai_ratio(3, 0.0, math.sqrt(3)) == pytest.approx(1.0, rel=1e-15)
    assert nariai_ratio(3, 0.6, 1.0) == pytest.approx(1 / (3 * 0.64), rel=1e-15)
    with pytest.raises(DomainError):
        nariai_ratio(3, 1.0, 0.0)
    rows = nariai_profile_ratios(nariai3)
    assert max(abs(r[2] - 1) for r in rows) <= 1e-10
