import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kottler.errors import DomainError
from kottler.mass import (RegionClass, classify_region, default_mass_grid, mass_report, monotonicity_scan,
                          surface_gravity, virtual_mass)
from kottler.models import BKParameters, bk_profile, max_mass
from oracle_values import BK3, BK4, M_MAX, NEAR_EXTREMAL_K_GAP, SQRT3


@pytest.mark.parametrize("ref", [BK3, BK4], ids=["n3", "n4"])
def test_surface_gravity_reference(ref):
    assert surface_gravity(ref["n"], ref["m"], "plus").k == pytest.approx(ref["k_plus"], rel=1e-13)
    assert surface_gravity(ref["n"], ref["m"], "minus").k == pytest.approx(ref["k_minus"], rel=1e-13)


def test_surface_gravity_rejects_bad_side():
    with pytest.raises(DomainError):
        surface_gravity(3, 0.1, "up")


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 8), st.floats(1e-4, 1 - 1e-4))
def test_surface_gravity_ranges(n, frac):
    m = frac * max_mass(n)
    kp = surface_gravity(n, m, "plus").k
    km = surface_gravity(n, m, "minus").k
    assert 1 < kp < math.sqrt(n) < km


@pytest.mark.parametrize("k, expected", [(1.2603, RegionClass.OUTER), (SQRT3, RegionClass.CYLINDRICAL),
                                         (3.4923, RegionClass.INNER), (SQRT3 + 5e-10, RegionClass.CYLINDRICAL),
                                         (SQRT3 + 2e-9, RegionClass.INNER)])
def test_classification(k, expected):
    assert classify_region(3, k) is expected


def test_classification_needs_positive_k():
    with pytest.raises(DomainError):
        classify_region(3, 0.0)


def test_virtual_mass_examples():
    assert virtual_mass(3, 1.2603, "outer") == pytest.approx(0.1, abs=1e-3)
    assert virtual_mass(3, SQRT3, "cylindrical") == M_MAX[3]
    with pytest.raises(DomainError):
        virtual_mass(3, 0.5, "outer")
    with pytest.raises(DomainError):
        virtual_mass(3, 1.5, "inner")
    with pytest.raises(DomainError):
        virtual_mass(3, 1.5, "sideways")


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_round_trip_over_grid(n):
    for m in default_mass_grid(n, 16):
        for side, cls in (("plus", "outer"), ("minus", "inner")):
            k = surface_gravity(n, m, side).k
            assert virtual_mass(n, k, cls) == pytest.approx(m, abs=1e-8)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_monotonicity_scan_passes(n):
    rep = monotonicity_scan(n)
    assert rep.passed and len(rep.masses) == 64
    assert np.all(np.diff(rep.k_plus) > 0) and np.all(np.diff(rep.k_minus) < 0)


def test_monotonicity_scan_flags_offending_pairs():
    # a grid that is not monotone in k once reversed still gets sorted, so inject an equal pair
    masses = list(default_mass_grid(3, 20))
    masses[5] = masses[4]
    rep = monotonicity_scan(3, masses)
    assert not rep.passed
    assert {o[0] for o in rep.offending} == {"plus", "minus"}


def test_monotonicity_scan_needs_grid():
    with pytest.raises(DomainError, match="insufficient grid"):
        monotonicity_scan(3, [0.1])


def test_de_sitter_limit():
    assert surface_gravity(3, 1e-6, "plus").k == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_near_extremal_gap_matches_reference(n):
    # the approach to sqrt(n) is like sqrt(1 - m/m_max); at 0.999 m_max the gap is about 0.03
    m = 0.999 * max_mass(n)
    gp, gm = NEAR_EXTREMAL_K_GAP[n]
    assert surface_gravity(n, m, "plus").k - math.sqrt(n) == pytest.approx(gp, abs=1e-6)
    assert surface_gravity(n, m, "minus").k - math.sqrt(n) == pytest.approx(gm, abs=1e-6)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_near_extremal_gap_shrinks_like_square_root(n):
    gaps = [surface_gravity(n, (1 - e) * max_mass(n), "plus").k - math.sqrt(n) for e in (1e-3, 1e-5)]
    assert gaps[1] / gaps[0] == pytest.approx(0.1, rel=0.05)


def test_classification_is_gauge_free(bk3):
    for gauge in (bk3.u_max, 1.0, 3.7):
        p = bk_profile(bk3, gauge=gauge, samples_per_side=64)
        k = abs(p.v[-1]) / p.gauge
        assert k == pytest.approx(BK3["k_plus"], abs=1e-6)
        assert classify_region(3, k) is RegionClass.OUTER


def test_mass_report():
    rep = mass_report(3, BK3["k_minus"])
    assert rep["class"] == "inner"
    assert rep["m"] == pytest.approx(0.1, abs=1e-12)
    assert rep["residual"] <= 1e-12
