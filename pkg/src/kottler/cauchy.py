"""Radial Cauchy evolution of warped static metrics from the maximum set of the lapse.

In the Gauss gauge ``g = dr^2 + rho(r)^2 g_Sigma`` with ``Ric(g_Sigma) = (n-2)
kappa g_Sigma`` the static equations reduce to

    u' = v,  v' = -n u - (n-1) (w/rho) v,  rho' = w,  w' = q0 v,

where ``q0 = w0 / gauge`` is the conserved ratio ``w / u``.  Writing ``w' =
q0 v`` instead of ``w' = w v / u`` keeps the system regular at ``u = 0``.  The
quantity ``2 rho w v - u [(n-2)(kappa - w^2) - n rho^2]`` is a first integral
that vanishes on solutions and is monitored along every run.

The integrator works with the normalized lapse ``u / gauge``, so the gauge
enters the output only through a final multiplication.  The ``minus``
direction is computed as the ``plus`` direction of the reflected data
``(r, v, w) -> (-r, -v, -w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConstraintViolation, DomainError, IntegrationError
from .mass import RegionClass, mass_report
from .models import check_dimension, critical_radii, deficit, lapse_max, max_mass, radius_zero
from .profile import RadialProfile, constraint_residual

DIRECTIONS = ("plus", "minus")


@dataclass(frozen=True)
class CauchyData:
    """Umbilic Einstein data on the maximum set: areal radius, lapse value and fiber constant."""

    n: int
    rho0: float
    gauge: float
    kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", check_dimension(self.n))
        if not self.kappa > 0:
            raise DomainError(f"fiber Einstein constant kappa={self.kappa!r} must be positive")
        if not self.gauge > 0:
            raise DomainError(f"gauge={self.gauge!r} must be positive")
        bound = self.rho_bound
        if not 0.0 < self.rho0 <= bound * (1.0 + 1e-15):
            raise DomainError(f"rho0={self.rho0!r} outside (0, {bound:.15g}]; the normal derivative "
                              "of rho would be imaginary")

    @property
    def rho_bound(self):
        return math.sqrt(self.kappa * (self.n - 2) / self.n)

    @property
    def w0(self):
        """``drho/dr`` at ``r = 0``, fixed by the constraint at ``v = 0``."""
        w2 = self.kappa - self.n * self.rho0**2 / (self.n - 2)
        return math.sqrt(w2) if w2 > 0 else 0.0

    @property
    def lam(self):
        """Einstein constant ``kappa / rho0^2`` of the induced metric on the maximum set."""
        return self.kappa / self.rho0**2

    @property
    def is_nariai(self):
        return self.w0 == 0.0

    @property
    def bk_mass(self):
        """Mass ``rho0^n / (n-2)`` of the BK model through this datum (``kappa = 1``)."""
        return self.rho0**self.n / (self.n - 2)


def initial_data(n, rho0, gauge=1.0, kappa=1.0) -> CauchyData:
    return CauchyData(n, float(rho0), float(gauge), float(kappa))


@dataclass(frozen=True)
class EvolveControls:
    method: str = "adaptive"
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = 0.01
    step: float = 1e-3
    max_range: float = 10.0
    constraint_tol: float = 1e-8
    rho_floor: float = 1e-8

    def __post_init__(self):
        if self.method not in ("adaptive", "rk4"):
            raise DomainError(f"method must be 'adaptive' or 'rk4', got {self.method!r}")
        for name in ("rtol", "atol", "max_step", "step", "max_range", "constraint_tol", "rho_floor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class HorizonData:
    side: str
    r_h: float
    rho_h: float
    k: float


def _rhs(n, w0):
    def f(_, y):
        u, v, rho, w = y
        return [v, -n * u - (n - 1) * (w / rho) * v, w, w0 * v]
    return f


def _rk4_step(f, y, h):
    k1 = f(0.0, y)
    k2 = f(0.0, [a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = f(0.0, [a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = f(0.0, [a + h * b for a, b in zip(y, k3)])
    return [a + h / 6.0 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]


def _adaptive(n, w0, y0, controls):
    f = _rhs(n, w0)

    def horizon(_, y):
        return y[0]
    horizon.terminal, horizon.direction = True, -1

    def collapse(_, y):
        return y[2] - controls.rho_floor
    collapse.terminal, collapse.direction = True, -1

    atol = [controls.atol, controls.atol, controls.atol, controls.atol]
    sol = solve_ivp(f, (0.0, controls.max_range), y0, method="RK45", rtol=controls.rtol, atol=atol,
                    max_step=controls.max_step, events=(horizon, collapse))
    if sol.status < 0:
        raise IntegrationError(f"integrator failed: {sol.message}")
    if sol.t_events[1].size:
        raise IntegrationError(f"areal radius collapsed below {controls.rho_floor:g} at r={sol.t_events[1][0]:.6g}")
    ts, ys = sol.t, sol.y.T
    hit = None
    if sol.t_events[0].size:
        t_h, y_h = float(sol.t_events[0][0]), sol.y_events[0][0].copy()
        y_h[0] = 0.0
        if ts[-1] >= t_h:
            ts, ys = ts[:-1], ys[:-1]
        ts, ys = np.append(ts, t_h), np.vstack([ys, y_h])
        hit = t_h
    return ts, ys, hit


def _fixed(n, w0, y0, controls):
    f = _rhs(n, w0)
    h = controls.step
    ts, ys = [0.0], [list(y0)]
    y, t = list(y0), 0.0
    while t < controls.max_range:
        step = min(h, controls.max_range - t)
        y_new = _rk4_step(f, y, step)
        if y_new[2] < controls.rho_floor:
            raise IntegrationError(f"areal radius collapsed below {controls.rho_floor:g} near r={t:.6g}")
        if y_new[0] <= 0.0:
            # the horizon lies inside this step: find the partial step length that lands on u = 0
            tau = brentq(lambda s: _rk4_step(f, y, s)[0], 0.0, step, xtol=1e-15, rtol=1e-15, maxiter=200)
            y_h = _rk4_step(f, y, tau)
            y_h[0] = 0.0
            ts.append(t + tau)
            ys.append(y_h)
            return np.array(ts), np.array(ys), t + tau
        t += step
        y = y_new
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys), None


def _integrate(n, w0, kappa, rho0, controls):
    y0 = [1.0, 0.0, rho0, w0]
    runner = _adaptive if controls.method == "adaptive" else _fixed
    ts, ys, t_h = runner(n, w0, y0, controls)
    res = constraint_residual(n, kappa, ys[:, 2], ys[:, 0], ys[:, 1], ys[:, 3])
    worst = float(np.max(np.abs(res)))
    if worst > controls.constraint_tol:
        raise ConstraintViolation(f"constraint residual {worst:.3e} exceeds {controls.constraint_tol:.1e}")
    return ts, ys, res, t_h


def evolve(data: CauchyData, direction="plus", controls: EvolveControls | None = None):
    """Evolve ``data`` towards ``r > 0`` (``plus``) or ``r < 0`` (``minus``).

    Returns the sampled profile (from the maximum set to the horizon, or to
    ``controls.max_range``) and the :class:`HorizonData` of the zero of the
    lapse, or ``None`` if none was reached.
    """
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be 'plus' or 'minus', got {direction!r}")
    controls = controls or EvolveControls()
    sign = 1.0 if direction == "plus" else -1.0
    ts, ys, res, t_h = _integrate(data.n, sign * data.w0, data.kappa, data.rho0, controls)
    r, v, w = sign * ts, sign * ys[:, 1], sign * ys[:, 3]
    u, rho, res = ys[:, 0], ys[:, 2], res
    if sign < 0:
        r, u, v, rho, w, res = (a[::-1] for a in (r, u, v, rho, w, res))
    g = data.gauge
    profile = RadialProfile(r, rho, g * u, g * v, w, g * res, gauge=g, family="evolved", n=data.n,
                            kappa=data.kappa, tolerances=_tolerances(controls))
    horizon = None
    if t_h is not None:
        i = -1 if sign > 0 else 0
        horizon = HorizonData(direction, float(r[i]), float(rho[i]), abs(float(v[i])))
    return profile, horizon


def evolve_both(data: CauchyData, controls: EvolveControls | None = None):
    """Both directions joined into one profile through ``r = 0``; horizons as ``{side: HorizonData}``."""
    minus, h_minus = evolve(data, "minus", controls)
    plus, h_plus = evolve(data, "plus", controls)
    cols = [np.concatenate([getattr(minus, k)[:-1], getattr(plus, k)]) for k in ("r", "rho", "u", "v", "w", "c_res")]
    profile = RadialProfile(*cols, gauge=data.gauge, family="evolved", n=data.n, kappa=data.kappa,
                            tolerances=dict(plus.tolerances))
    return profile, {"minus": h_minus, "plus": h_plus}


def _tolerances(controls):
    out = {"method": controls.method, "constraint": controls.constraint_tol}
    if controls.method == "adaptive":
        out.update(rtol=controls.rtol, atol=controls.atol, max_step=controls.max_step)
    else:
        out["step"] = controls.step
    return out


def invariant_drift(profile, w0):
    """``max |w - q0 u|`` along a profile, with ``q0 = w0 / gauge``."""
    return float(np.max(np.abs(profile.w - (w0 / profile.gauge) * profile.u)))


def extract_sigma_geometry(profile):
    """Mean curvature, umbilicity defect, scalar curvature and Einstein constant of ``{r = 0}``."""
    if not profile.has_origin():
        raise DomainError("profile has no sample at r = 0")
    n, i = profile.n, profile.origin_index
    rho0, w0 = float(profile.rho[i]), float(profile.w[i])
    H = (n - 1) * w0 / rho0
    return {
        "H": H,
        "hring_sq": 0.0,
        "R_sigma": n * (n - 1) + (n - 2) / (n - 1) * H * H,
        "lambda": profile.kappa / rho0**2,
    }


def compare_to_model(profile, m):
    """Largest deviation of ``(u u_max / gauge)^2`` from the BK lapse squared at the same ``rho``.

    Squares are compared because the lapse itself has a square-root branch
    point at each horizon, where a ``rho`` error of ``1e-11`` already moves
    ``u`` by several ``1e-6``.
    """
    n = profile.n
    umax, r0 = lapse_max(n, m), radius_zero(n, m)
    r_minus, r_plus = critical_radii(n, m)
    lo, hi = float(np.min(profile.rho)), float(np.max(profile.rho))
    if hi - lo <= 1e-9 * hi:
        raise DomainError("profile areal radius is constant; it cannot be matched to a BK model")
    if hi < r_minus or lo > r_plus:
        raise DomainError(f"profile rho range [{lo:.6g}, {hi:.6g}] is disjoint from [{r_minus:.6g}, {r_plus:.6g}]")
    offset = profile.rho - r0
    near = np.abs(offset) < 0.5 * r0
    model = np.where(near, umax**2 - deficit(n, r0, np.where(near, offset, 0.0)),
                     1.0 - profile.rho**2 - 2.0 * m * profile.rho ** (2 - n))
    lapse = profile.u * (umax / profile.gauge)
    return float(np.max(np.abs(lapse * lapse - model)))


def round_trip(n, rho0, controls: EvolveControls | None = None, tol=1e-6, kappa=1.0):
    """Evolve a datum both ways, classify the two sides and recover both virtual masses.

    The datum of the BK model of mass ``m = rho0^n / (n-2)`` should return
    that mass on both sides: outer on the ``plus`` side and inner on the
    ``minus`` side, or cylindrical on both for the Nariai datum.
    """
    data = initial_data(n, rho0, 1.0, kappa)
    profile, horizons = evolve_both(data, controls)
    sides = {}
    for side, h in horizons.items():
        if h is None:
            raise IntegrationError(f"no horizon reached on the {side} side")
        report = mass_report(n, h.k)
        sides[side] = {"r_h": h.r_h, "rho_h": h.rho_h, "k": h.k, "class": report["class"], "m": report["m"]}
    if data.is_nariai:
        expected_class = {"plus": RegionClass.CYLINDRICAL, "minus": RegionClass.CYLINDRICAL}
        m_expected = max_mass(n)
    else:
        expected_class = {"plus": RegionClass.OUTER, "minus": RegionClass.INNER}
        m_expected = data.bk_mass
    classes_ok = all(sides[s]["class"] == expected_class[s].value for s in sides)
    masses_ok = all(abs(sides[s]["m"] - m_expected) <= tol for s in sides)
    deviation = None
    if not data.is_nariai and 0.0 < m_expected < max_mass(n):
        deviation = compare_to_model(profile, m_expected)
    return {
        "n": data.n,
        "rho0": data.rho0,
        "m_expected": m_expected,
        "m_outer": sides["plus"]["m"],
        "m_inner": sides["minus"]["m"],
        "sides": sides,
        "constraint_max": float(np.max(np.abs(profile.c_res))),
        "invariant_max": invariant_drift(profile, data.w0),
        "model_deviation": deviation,
        "tolerance": tol,
        "passed": bool(classes_ok and masses_ok),
    }


__all__ = ["CauchyData", "EvolveControls", "HorizonData", "initial_data", "evolve", "evolve_both",
           "constraint_residual", "extract_sigma_geometry", "compare_to_model", "round_trip",
           "invariant_drift"]
