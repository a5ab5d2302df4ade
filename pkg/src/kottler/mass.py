"""Surface gravities of the model family, region classes and virtual-mass inversion."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .models import check_dimension, check_mass, critical_radii, lapse_max, max_mass, radius_zero

CLASSIFICATION_TOL = 1e-9
BISECTION_STEPS = 60
SCAN_POINTS = 64


class RegionClass(str, enum.Enum):
    OUTER = "outer"
    INNER = "inner"
    CYLINDRICAL = "cylindrical"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown region class {value!r}") from None


@dataclass(frozen=True)
class SurfaceGravity:
    k: float
    side: str


def _k(n, m, side):
    # normalized surface gravity without the near-extremal guard; used by the bisection
    r0 = radius_zero(n, m)
    r_h = critical_radii(n, m)[1 if side == "plus" else 0]
    slope = r_h * math.expm1(n * math.log(r0 / r_h))
    return abs(slope) / lapse_max(n, m)


def surface_gravity(n, m, side) -> SurfaceGravity:
    """Normalized surface gravity ``|grad u| / u_max`` at the ``side`` horizon of the model of mass ``m``."""
    n = check_dimension(n)
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
    check_mass(n, m, near_extremal=True)
    return SurfaceGravity(_k(n, m, side), side)


def classify_region(n, k, tol=CLASSIFICATION_TOL) -> RegionClass:
    n = check_dimension(n)
    if not k > 0:
        raise DomainError("surface gravity must be positive")
    threshold = math.sqrt(n)
    if abs(k - threshold) <= tol:
        return RegionClass.CYLINDRICAL
    return RegionClass.OUTER if k < threshold else RegionClass.INNER


@dataclass(frozen=True)
class MonotonicityReport:
    n: int
    masses: tuple
    k_plus: tuple
    k_minus: tuple
    offending: tuple = field(default=())

    @property
    def passed(self):
        return not self.offending


def monotonicity_scan(n, masses=None) -> MonotonicityReport:
    """Check that ``k_plus`` increases and ``k_minus`` decreases along a mass grid.

    The virtual-mass inversion relies on this; the default grid has
    ``SCAN_POINTS`` masses spread over ``(eps, (1 - eps) m_max)``.
    """
    n = check_dimension(n)
    if masses is None:
        masses = default_mass_grid(n)
    masses = np.sort(np.asarray(masses, dtype=float))
    if masses.size < 16:
        raise DomainError(f"insufficient grid: {masses.size} masses, need at least 16")
    kp = np.array([_k(n, m, "plus") for m in masses])
    km = np.array([_k(n, m, "minus") for m in masses])
    bad = []
    for i in range(masses.size - 1):
        if not kp[i + 1] > kp[i]:
            bad.append(("plus", float(masses[i]), float(masses[i + 1])))
        if not km[i + 1] < km[i]:
            bad.append(("minus", float(masses[i]), float(masses[i + 1])))
    return MonotonicityReport(n, tuple(masses.tolist()), tuple(kp.tolist()), tuple(km.tolist()), tuple(bad))


def default_mass_grid(n, count=SCAN_POINTS, eps=1e-3):
    mmax = max_mass(n)
    return np.linspace(eps * mmax, (1.0 - eps) * mmax, count)


@functools.lru_cache(maxsize=None)
def _verified_monotone(n):
    report = monotonicity_scan(n)
    if not report.passed:
        raise DomainError(f"surface gravity is not monotone in m for n={n}: {report.offending[:3]}")
    return True


def virtual_mass(n, k, cls) -> float:
    """Mass of the model whose horizon has normalized surface gravity ``k``.

    Outer regions invert ``k_plus`` on ``(1, sqrt(n))``, inner regions invert
    ``k_minus`` on ``(sqrt(n), inf)``; cylindrical regions carry ``m_max``.
    """
    n = check_dimension(n)
    cls = RegionClass.parse(cls)
    mmax = max_mass(n)
    if cls is RegionClass.CYLINDRICAL:
        return mmax
    root_n = math.sqrt(n)
    if cls is RegionClass.OUTER:
        if not 1.0 < k < root_n:
            raise DomainError(f"outer surface gravity k={k!r} outside (1, sqrt({n}))")
        side, increasing = "plus", True
    else:
        if not k > root_n:
            raise DomainError(f"inner surface gravity k={k!r} not above sqrt({n})")
        side, increasing = "minus", False
    _verified_monotone(n)
    lo, hi = 1e-12, mmax - 1e-12
    k_lo, k_hi = _k(n, lo, side), _k(n, hi, side)
    if not min(k_lo, k_hi) <= k <= max(k_lo, k_hi):
        raise DomainError(f"surface gravity k={k!r} not attained on [{lo:g}, m_max - 1e-12]")
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if (_k(n, mid, side) < k) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mass_report(n, k, cls=None):
    """Classification plus inverted mass, as emitted by the ``mass`` subcommand."""
    n = check_dimension(n)
    if cls is None:
        cls = classify_region(n, k)
    cls = RegionClass.parse(cls)
    m = virtual_mass(n, k, cls)
    if cls is RegionClass.CYLINDRICAL:
        residual = abs(k - math.sqrt(n))
    else:
        residual = abs(_k(n, m, "plus" if cls is RegionClass.OUTER else "minus") - k)
    return {"n": n, "k": k, "class": cls.value, "m": m, "residual": residual}
