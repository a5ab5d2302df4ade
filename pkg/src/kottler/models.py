"""Birmingham-Kottler, Nariai and de Sitter model data in dimension ``3 <= n <= 8``.

The BK lapse is ``u^2 = 1 - rho^2 - 2 m rho^(2-n)`` in the areal coordinate
``rho``; the cosmological constant is fixed by ``R = n(n-1)``.  Near the
maximum radius ``r_0 = ((n-2) m)^(1/n)`` the lapse is written in deficit form
``u^2 = u_max^2 - D(rho - r_0)`` which avoids the cancellation in the direct
formula, so roots and pseudo-radial values stay accurate up to the extremal
mass.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError
from .profile import RadialProfile, constraint_residual

MIN_DIMENSION = 3
MAX_DIMENSION = 8
NEAR_EXTREMAL = 1e-6
ROOT_RESIDUAL = 1e-10

_SERIES_TERMS = 40


def check_dimension(n):
    if isinstance(n, bool) or int(n) != n or not MIN_DIMENSION <= n <= MAX_DIMENSION:
        raise DomainError(f"dimension n={n!r} unsupported (need {MIN_DIMENSION} <= n <= {MAX_DIMENSION})")
    return int(n)


def max_mass(n):
    """Extremal mass ``sqrt((n-2)^(n-2) / n^n)``; BK models need ``0 < m < max_mass(n)``."""
    n = check_dimension(n)
    return math.sqrt((n - 2) ** (n - 2) / n**n)


def check_mass(n, m, *, near_extremal=False):
    mmax = max_mass(n)
    if not 0.0 < m < mmax:
        raise DomainError(f"mass m={m!r} outside (0, {mmax:.15g}) for n={n}")
    if near_extremal and m > (1.0 - NEAR_EXTREMAL) * mmax:
        raise DomainError(f"mass m={m!r} is within {NEAR_EXTREMAL:g} of the extremal value; "
                          "profile generation is rejected there")
    return float(m)


def radius_zero(n, m):
    """Areal radius ``((n-2) m)^(1/n)`` of the maximum set of the model lapse."""
    check_mass(n, m)
    return ((n - 2) * m) ** (1.0 / n)


def lapse_max(n, m):
    """Maximum of the model lapse, ``sqrt(1 - (m/m_max)^(2/n))``."""
    check_mass(n, m)
    return math.sqrt(-math.expm1((2.0 / n) * math.log(m / max_mass(n))))


def lapse_squared(n, m, rho):
    """``(u^2, d(u^2)/drho)`` of the BK model at areal radius ``rho``."""
    check_dimension(n)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("areal radius must be positive")
    u2 = 1.0 - rho**2 - 2.0 * m * rho ** (2 - n)
    du2 = -2.0 * rho + 2.0 * m * (n - 2) * rho ** (1 - n)
    if u2.ndim == 0:
        return float(u2), float(du2)
    return u2, du2


def _binomial_tail(a, x):
    """``(1 + x)^a - 1 - a x`` without cancellation for small ``|x|``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.1
    xs = np.where(small, x, 0.0)
    coef = a * (a - 1) / 2.0
    term = coef * xs**2
    total = term.copy()
    for k in range(3, _SERIES_TERMS):
        coef *= (a - k + 1) / k
        term = coef * xs**k
        total += term
    xl = np.where(small, 0.0, x)
    direct = np.expm1(a * np.log1p(xl)) - a * xl
    out = np.where(small, total, direct)
    return float(out) if out.ndim == 0 else out


def deficit(n, r0, offset):
    """``u_max^2 - u^2`` at ``rho = r0 + offset`` for the model with maximum radius ``r0``."""
    x = np.asarray(offset, dtype=float) / r0
    out = (r0 * x) ** 2 + (2.0 * r0**2 / (n - 2)) * _binomial_tail(2 - n, x)
    return float(out) if np.ndim(out) == 0 else out


def model_slope(n, r0, offset):
    """``d u_m / d r = -rho + (n-2) m rho^(1-n)`` at ``rho = r0 + offset`` (unit lapse gauge)."""
    offset = np.asarray(offset, dtype=float)
    rho = r0 + offset
    out = rho * np.expm1(-n * np.log1p(offset / r0))
    return float(out) if out.ndim == 0 else out


def critical_radii(n, m):
    """The horizon radii ``(r_minus, r_plus)``, roots of ``1 - r^2 - 2 m r^(2-n)``."""
    n = check_dimension(n)
    return _critical_radii(n, check_mass(n, m))


@functools.lru_cache(maxsize=4096)
def _critical_radii(n, m):
    r0 = radius_zero(n, m)
    umax2 = lapse_max(n, m) ** 2

    def f(r):
        if abs(r - r0) < 0.5 * r0:
            return umax2 - deficit(n, r0, r - r0)
        return 1.0 - r * r - 2.0 * m * r ** (2 - n)

    # g(r) <= 1 - 2 m r^(2-n) < 0 below (2m)^(1/(n-2)), and g(1) = -2m < 0
    eps = np.finfo(float).eps
    lo = (2.0 * m) ** (1.0 / (n - 2))
    r_minus = brentq(f, lo, r0, xtol=1e-300, rtol=4 * eps, maxiter=500)
    r_plus = brentq(f, r0, 1.0, xtol=1e-300, rtol=4 * eps, maxiter=500)
    roots = (r_minus, r_plus)
    for r in roots:
        res = abs(lapse_squared(n, m, r)[0])
        if res > ROOT_RESIDUAL:
            raise DomainError(f"horizon root residual {res:.3e} too large (m={m!r} near extremal?)")
    return roots


@dataclass(frozen=True)
class BKParameters:
    """Dimension and mass of a BK model with its critical radii and lapse maximum."""

    n: int
    m: float
    r_minus: float = field(init=False)
    r_plus: float = field(init=False)
    r_zero: float = field(init=False)
    u_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", check_dimension(self.n))
        object.__setattr__(self, "m", check_mass(self.n, self.m))
        r_minus, r_plus = critical_radii(self.n, self.m)
        object.__setattr__(self, "r_minus", r_minus)
        object.__setattr__(self, "r_plus", r_plus)
        object.__setattr__(self, "r_zero", radius_zero(self.n, self.m))
        object.__setattr__(self, "u_max", lapse_max(self.n, self.m))

    def horizon(self, side):
        return self.r_plus if side == "plus" else self.r_minus


class GaussGauge:
    """One side of a BK model in the geodesic coordinate ``r`` (``r = 0`` on the maximum set).

    The substitution ``rho = rho_h -/+ t^2`` about the horizon radius turns
    ``dr = drho / u`` into ``dr = 2 dt / sqrt(G(t))`` with ``G = u^2 / t^2``
    smooth and positive on the closed interval from the horizon (``t = 0``)
    to the maximum set (``t = T``).  Lapse values are in the unit gauge
    ``u(0) = u_max``.
    """

    def __init__(self, params: BKParameters, side: str):
        if side not in ("plus", "minus"):
            raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
        self.params = params
        self.side = side
        self.sign = 1 if side == "plus" else -1
        self.rho_h = params.horizon(side)
        self.T = math.sqrt(abs(self.rho_h - params.r_zero))
        n, m = params.n, params.m
        self._c = 2.0 * m * self.rho_h ** (2 - n)
        self._slope_h = -2.0 * self.rho_h - 2.0 * m * (2 - n) * self.rho_h ** (1 - n)
        self._rh = None

    def G(self, t):
        n = self.params.n
        e = -self.sign * t * t
        if e == 0.0:
            a = self._slope_h
        else:
            a = -(2.0 * self.rho_h + e) - self._c * math.expm1((2 - n) * math.log1p(e / self.rho_h)) / e
        return -self.sign * a

    def _drdt(self, t):
        return 2.0 / math.sqrt(self.G(t))

    def distance(self, t_lo, t_hi):
        val, _ = quad(self._drdt, t_lo, t_hi, epsabs=1e-15, epsrel=3e-14, limit=200)
        return val

    def r_of_t(self, t):
        return self.sign * self.distance(t, self.T)

    @property
    def horizon_r(self):
        """Signed geodesic distance from the maximum set to the horizon."""
        if self._rh is None:
            self._rh = self.r_of_t(0.0)
        return self._rh

    def state(self, t):
        """Unit-gauge ``(rho, u, du/dr, drho/dr)`` at parameter ``t``."""
        p = self.params
        offset = self.sign * (self.T - t) * (self.T + t)
        rho = p.r_zero + offset
        u = t * math.sqrt(self.G(t))
        v = model_slope(p.n, p.r_zero, offset)
        return rho, u, v, u

    def t_of_r(self, r):
        rh = self.horizon_r
        if not 0.0 <= self.sign * r <= self.sign * rh:
            raise DomainError(f"r={r!r} outside [0, {rh:.15g}] on the {self.side} side")
        if r == 0.0:
            return self.T
        target = abs(r)
        return brentq(lambda t: self.distance(t, self.T) - target, 0.0, self.T,
                      xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    def samples(self, count):
        """``count + 1`` samples from the maximum set to the horizon, uniform in ``t``."""
        ts = self.T * (1.0 - np.arange(count + 1) / count)
        ts[-1] = 0.0
        r = np.zeros(count + 1)
        for k in range(count):
            r[k + 1] = r[k] + self.distance(ts[k + 1], ts[k])
        self._rh = r[-1]
        states = np.array([self.state(t) for t in ts])
        return self.sign * r, states


def bk_state(params: BKParameters, r, gauge=None):
    """Exact ``(rho, u, du/dr, drho/dr)`` of the BK model at geodesic coordinate ``r``."""
    s = 1.0 if gauge is None else gauge / params.u_max
    side = GaussGauge(params, "plus" if r >= 0 else "minus")
    rho, u, v, w = side.state(side.t_of_r(r))
    return rho, s * u, s * v, w


def bk_profile(params: BKParameters, gauge=None, samples_per_side=400, constraint_tol=1e-10):
    """Sample a BK model in Gauss gauge from the inner to the outer horizon.

    ``gauge`` is the lapse value on the maximum set (default ``u_max``); the
    geometry does not depend on it.
    """
    check_mass(params.n, params.m, near_extremal=True)
    if gauge is None:
        gauge = params.u_max
    if not gauge > 0:
        raise DomainError("gauge must be positive")
    if samples_per_side < 8:
        raise DomainError("need at least 8 samples per side")
    s = gauge / params.u_max
    r_p, st_p = GaussGauge(params, "plus").samples(samples_per_side)
    r_m, st_m = GaussGauge(params, "minus").samples(samples_per_side)
    r = np.concatenate([r_m[:0:-1], r_p])
    st = np.concatenate([st_m[:0:-1], st_p])
    rho, u, v, w = st.T
    u, v = s * u, s * v
    c_res = constraint_residual(params.n, 1.0, rho, u, v, w)
    worst = float(np.max(np.abs(c_res)))
    if worst > constraint_tol:
        raise DomainError(f"grid too coarse: constraint residual {worst:.3e}")
    return RadialProfile(r, rho, u, v, w, c_res, gauge=float(gauge), family="bk", n=params.n,
                         m=params.m, tolerances={"quad_epsabs": 1e-15, "constraint": constraint_tol})


def nariai_profile(n, samples=401, gauge=1.0):
    """Nariai model ``rho = sqrt((n-2)/n)``, ``u = gauge * cos(sqrt(n) r)`` between its horizons.

    The areal form ``-sin^2(s) dt^2 + ds^2/n + ...`` is rescaled to unit speed
    and shifted so that ``r = 0`` is the maximum set.
    """
    n = check_dimension(n)
    if samples < 3:
        raise DomainError("need at least 3 samples")
    k = math.sqrt(n)
    r = np.linspace(-math.pi / (2 * k), math.pi / (2 * k), samples)
    if samples % 2:
        r[samples // 2] = 0.0
    rho = np.full_like(r, math.sqrt((n - 2) / n))
    u = gauge * np.cos(k * r)
    v = -gauge * k * np.sin(k * r)
    w = np.zeros_like(r)
    c_res = constraint_residual(n, 1.0, rho, u, v, w)
    return RadialProfile(r, rho, u, v, w, c_res, gauge=float(gauge), family="nariai", n=n,
                         m=max_mass(n), tolerances={})
