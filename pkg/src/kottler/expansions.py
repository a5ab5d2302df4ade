"""Taylor expansions about the maximum set and numerical checks of their remainder orders.

``r`` is the signed distance to the maximum set.  All expansions are
evaluated in Horner form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import BKParameters, bk_state, check_dimension, check_mass, deficit, lapse_max, radius_zero

MIN_REMAINDER_RADIUS = 1e-3


@dataclass(frozen=True)
class SigmaGeometry:
    """Extrinsic and intrinsic data of the maximum set entering the expansion of ``f``.

    ``phi0`` and ``phidot0`` are the source ``phi`` of ``Laplace f = -phi(f)``
    and its derivative, evaluated at ``f_max``.
    """

    H: float
    hring_sq: float
    h_sq: float
    R: float
    R_sigma: float
    phi0: float
    phidot0: float

    @classmethod
    def static(cls, n, f_max, H, hring_sq=0.0):
        """Data of a static lapse: ``phi(f) = n f``, ``R = n(n-1)``, ``Ric(nu, nu) = 0`` on the maximum set.

        The induced scalar curvature then follows from the Gauss equation,
        ``R_sigma = R + H^2 - |h|^2``.
        """
        n = check_dimension(n)
        h_sq = hring_sq + H * H / (n - 1)
        R = n * (n - 1)
        return cls(H=H, hring_sq=hring_sq, h_sq=h_sq, R=R, R_sigma=R + H * H - h_sq,
                   phi0=n * f_max, phidot0=n)


def expand_general_f(geom: SigmaGeometry, f_max, r):
    """Fourth-order expansion of a solution of ``Laplace f = -phi(f)`` about a smooth maximum set."""
    g = geom
    c4 = -(g.phi0 / 24.0) * (g.h_sq + 2.0 * g.H**2 + g.R - g.R_sigma - g.phidot0)
    c3 = (g.phi0 / 6.0) * g.H
    c2 = -g.phi0 / 2.0
    return f_max + r * r * (c2 + r * (c3 + r * c4))


def lapse_coefficients(n, H, hring_sq=0.0):
    """Coefficients ``(c2, c3, c4)`` of ``u / u_max = 1 + c2 r^2 + c3 r^3 + c4 r^4``."""
    return (-n / 2.0, n * H / 6.0,
            -(n / 24.0) * (2.0 * hring_sq + (n + 1) / (n - 1) * H * H - n))


def expand_lapse(n, u_max, H, hring_sq, r):
    n = check_dimension(n)
    c2, c3, c4 = lapse_coefficients(n, H, hring_sq)
    return u_max * (1.0 + r * r * (c2 + r * (c3 + r * c4)))


def _mismatch(n, m, H):
    # K = u_max / r_0 - H / (n-1); vanishes exactly on BK data
    return lapse_max(n, m) / radius_zero(n, m) - H / (n - 1)


def expand_psi(n, m, H, hring_sq, r):
    """Third-order expansion of the pseudo-radial function along the normal geodesic."""
    n = check_dimension(n)
    check_mass(n, m)
    umax, r0 = lapse_max(n, m), radius_zero(n, m)
    K = _mismatch(n, m, H)
    c2 = (n - 1) / 6.0 * K
    c3 = (hring_sq - 2 * n + (n - 1) / 9.0 * K * ((n - 4) * umax / r0 - (n + 2) * H / (n - 1))) / 12.0
    return umax * (r0 / umax + r * (1.0 + r * (c2 + r * c3)))


def expand_ratio(n, m, H, r, hring_sq=0.0, second_order=False):
    """Expansion of the gradient ratio near the maximum set of an outer region.

    With ``second_order`` the term ``hring_sq r^2 / 2`` is added when the
    first-order coefficient vanishes.
    """
    n = check_dimension(n)
    check_mass(n, m)
    K = _mismatch(n, m, H)
    value = 1.0 + 2.0 * (n - 1) / 3.0 * K * r
    if second_order and abs(K) <= 1e-12 * lapse_max(n, m) / radius_zero(n, m):
        value += 0.5 * hring_sq * r * r
    return value


def expand_ratio_nariai(H, r, hring_sq=0.0, second_order=False):
    value = 1.0 - 2.0 / 3.0 * H * r
    if second_order and H == 0.0:
        value += 0.5 * hring_sq * r * r
    return value


def gradient_limit(laplacian_at_p):
    """Limit of ``|grad f|^2 / (f_max - f)`` at a point of the maximum set, ``-2 Laplace f``."""
    if not laplacian_at_p < 0:
        raise DomainError(f"Laplacian {laplacian_at_p!r} must be negative at a nondegenerate maximum")
    return -2.0 * laplacian_at_p


def limit_quotient(params: BKParameters, r):
    """``|du/dr|^2 / (u_max - u)`` on the BK model at geodesic coordinate ``r`` (unit gauge)."""
    if r == 0:
        raise DomainError("the quotient is 0/0 at r = 0; use gradient_limit")
    rho, u, v, _ = bk_state(params, r)
    gap = deficit(params.n, params.r_zero, rho - params.r_zero) / (params.u_max + u)
    return v * v / gap


@dataclass(frozen=True)
class RemainderReport:
    order: int
    r: tuple
    exact: tuple
    approx: tuple
    normalized: tuple
    growth: tuple
    passed: bool

    def rows(self):
        return list(zip(self.r, self.exact, self.approx, self.normalized))


def dyadic_grid(r_max=0.1, count=4):
    return tuple(r_max / 2**k for k in range(count))


def remainder_order(exact, expansion, p, grid=None) -> RemainderReport:
    """Check that ``|exact(r) - expansion(r)|`` is ``O(r^(p+1))`` on a dyadic grid.

    The check passes when the normalized remainder ``|exact - expansion| /
    r^(p+1)`` grows by less than a factor 2 from each grid point to the next
    (halved) one.  A remainder that is really of order ``q < p + 1`` grows by
    ``2^(p+1-q) >= 2`` per halving, while a higher-order remainder shrinks.
    """
    grid = dyadic_grid() if grid is None else tuple(float(r) for r in grid)
    if len(grid) < 2:
        raise DomainError("need at least two grid radii")
    mags = [abs(r) for r in grid]
    if min(mags) < MIN_REMAINDER_RADIUS:
        raise DomainError(f"grid radius below {MIN_REMAINDER_RADIUS:g}; rounding would dominate the remainder")
    for a, b in zip(mags, mags[1:]):
        if not math.isclose(a, 2.0 * b, rel_tol=1e-12):
            raise DomainError("grid must halve from each radius to the next")
    try:
        ex = [float(exact(r)) for r in grid]
    except DomainError as err:
        raise DomainError(f"grid outside the sampler's domain: {err}") from err
    ap = [float(expansion(r)) for r in grid]
    normalized = [abs(e - a) / abs(r) ** (p + 1) for e, a, r in zip(ex, ap, grid)]
    growth = []
    for a, b in zip(normalized, normalized[1:]):
        growth.append(b / a if a > 0 else (0.0 if b == 0 else math.inf))
    passed = all(g < 2.0 for g in growth)
    return RemainderReport(p, grid, tuple(ex), tuple(ap), tuple(normalized), tuple(growth), passed)


def bk_lapse_sampler(params: BKParameters):
    """Exact lapse ``r -> u(r)`` of a BK model in the gauge ``u(0) = u_max``."""
    return lambda r: bk_state(params, r)[1]


def bk_rho_sampler(params: BKParameters):
    return lambda r: bk_state(params, r)[0]


def nariai_lapse_sampler(n, gauge=1.0):
    k = math.sqrt(check_dimension(n))
    return lambda r: gauge * math.cos(k * r)


def taylor_coefficients(sampler, h=0.01, points=7):
    """Finite-difference estimates of ``f(0), f'(0), ..., f''''(0)`` from a symmetric stencil.

    The estimates come from interpolating ``sampler`` at ``points`` equispaced
    nodes ``k h`` by a polynomial, i.e. the classical centered formulas.
    """
    if points % 2 == 0 or points < 5:
        raise DomainError("need an odd number of stencil points, at least 5")
    half = points // 2
    x = h * np.arange(-half, half + 1)
    y = np.array([sampler(float(t)) for t in x])
    coef = np.polynomial.polynomial.polyfit(x / h, y, points - 1)
    derivs = [coef[j] * math.factorial(j) / h**j for j in range(5)]
    return tuple(float(d) for d in derivs)


__all__ = ["SigmaGeometry", "expand_general_f", "expand_lapse", "lapse_coefficients", "expand_psi",
           "expand_ratio", "expand_ratio_nariai", "gradient_limit", "limit_quotient", "RemainderReport",
           "remainder_order", "dyadic_grid", "bk_lapse_sampler", "bk_rho_sampler", "nariai_lapse_sampler",
           "taylor_coefficients"]
