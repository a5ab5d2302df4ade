"""Pseudo-radial function, model gradient and the gradient-estimate quantities.

For a lapse value ``u`` in ``[0, u_max(m)]`` the pseudo-radial value ``Psi``
is the areal radius at which the BK model of mass ``m`` takes the value ``u``,
on the outer (``Psi >= r_0``) or inner (``Psi <= r_0``) branch.  Callers are
expected to use the lapse gauge ``u(0) = u_max(m)``.
"""

from __future__ import annotations

import enum

from scipy.optimize import brentq

from .errors import DomainError, EndpointLimitError
from .models import check_dimension, check_mass, critical_radii, deficit, lapse_max, model_slope, radius_zero

ENDPOINT_TOL = 1e-9
PSI_RESIDUAL = 1e-10

_EPS = 2.220446049250313e-16


class Branch(str, enum.Enum):
    OUTER = "outer"
    INNER = "inner"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown branch {value!r}; expected 'outer' or 'inner'") from None


def _offset(n, m, u, branch):
    """``Psi - r_0`` for lapse value ``u``, solved in deficit form."""
    n = check_dimension(n)
    check_mass(n, m)
    branch = Branch.parse(branch)
    umax = lapse_max(n, m)
    if u > umax and u <= umax * (1.0 + 4 * _EPS):
        u = umax
    if not 0.0 <= u <= umax:
        raise DomainError(f"lapse value u={u!r} outside [0, u_max={umax:.15g}]")
    r0 = radius_zero(n, m)
    r_minus, r_plus = critical_radii(n, m)
    if u == umax:
        return 0.0
    if u == 0.0:
        return (r_plus if branch is Branch.OUTER else r_minus) - r0
    target = (umax - u) * (umax + u)
    end = (r_plus if branch is Branch.OUTER else r_minus) - r0
    if deficit(n, r0, end) <= target:
        # u is within rounding of 0: the root is the horizon itself
        return end
    lo, hi = sorted((0.0, end))
    return brentq(lambda e: deficit(n, r0, e) - target, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)


def psi(n, m, u, branch) -> float:
    """Pseudo-radial value of the lapse value ``u`` on ``branch``.

    >>> round(psi(3, 0.1, 0.5, "outer"), 6)
    0.672883
    """
    e = _offset(n, m, u, branch)
    value = radius_zero(n, m) + e
    res = abs(1.0 - value * value - 2.0 * m * value ** (2 - n) - u * u)
    if res > PSI_RESIDUAL:
        raise DomainError(f"pseudo-radial residual {res:.3e} exceeds {PSI_RESIDUAL:g}")
    return value


def model_gradient(n, m, psi_value) -> float:
    """``|grad u_m|`` of the model as a function of the areal radius: ``Psi |1 - (n-2) m Psi^(-n)|``."""
    n = check_dimension(n)
    check_mass(n, m)
    r_minus, r_plus = critical_radii(n, m)
    slack = 8 * _EPS * r_plus
    if not r_minus - slack <= psi_value <= r_plus + slack:
        raise DomainError(f"psi={psi_value!r} outside [r_minus, r_plus] = [{r_minus:.15g}, {r_plus:.15g}]")
    return psi_value * abs(1.0 - (n - 2) * m * psi_value ** (-n))


def _interior(n, m, u):
    umax = lapse_max(n, m)
    if u <= ENDPOINT_TOL:
        raise EndpointLimitError(
            f"u={u!r} is at the horizon end of the range; the ratio is 0/0 there, "
            "use the surface gravity instead")
    if u >= umax - ENDPOINT_TOL:
        raise EndpointLimitError(
            f"u={u!r} is at u_max={umax:.15g}; the ratio is 0/0 there, use expansions.gradient_limit")


def _model_slope_at(n, m, u, branch):
    e = _offset(n, m, u, branch)
    r0 = radius_zero(n, m)
    return r0 + e, abs(model_slope(n, r0, e))


def gradient_ratio(n, m, u, grad_u_abs, branch) -> float:
    """``|grad u|^2 / (|grad u_m| o Psi)^2``; at most 1 on regions of virtual mass ``m``."""
    check_dimension(n)
    check_mass(n, m)
    _interior(n, m, u)
    if grad_u_abs < 0:
        raise DomainError("gradient norm must be nonnegative")
    _, g = _model_slope_at(n, m, u, branch)
    return (grad_u_abs / g) ** 2


def w_functional(n, m, u, grad_u_sq, branch) -> float:
    """``W = Psi / (|grad u_m| o Psi) * ((|grad u_m| o Psi)^2 - |grad u|^2)``.

    ``W >= 0`` exactly when :func:`gradient_ratio` is at most 1.
    """
    check_dimension(n)
    check_mass(n, m)
    _interior(n, m, u)
    if grad_u_sq < 0:
        raise DomainError("squared gradient must be nonnegative")
    p, g = _model_slope_at(n, m, u, branch)
    return p * (g - grad_u_sq / g)


def nariai_ratio(n, u_normalized, grad_u_abs) -> float:
    """``|grad u|^2 / (n (1 - u^2))`` for a lapse normalized to ``max u = 1``."""
    n = check_dimension(n)
    if not 0.0 <= u_normalized < 1.0:
        raise DomainError(f"normalized lapse {u_normalized!r} outside [0, 1)")
    return grad_u_abs**2 / (n * (1.0 - u_normalized) * (1.0 + u_normalized))


def profile_ratios(profile, m=None, exclude=ENDPOINT_TOL):
    """Per-sample gradient ratios and W values of a profile against the model of mass ``m``.

    The profile is rescaled to the gauge ``u(0) = u_max(m)``.  Samples within
    ``exclude`` of either endpoint of the lapse range are skipped.  Returns a
    list of ``(r, u, branch, ratio, w)`` tuples; the branch is ``outer`` for
    ``r > 0``.
    """
    m = profile.m if m is None else m
    if m is None:
        raise DomainError("profile carries no mass; pass m explicitly")
    n = profile.n
    umax = lapse_max(n, m)
    s = umax / profile.gauge
    rows = []
    for r, u, v in zip(profile.r, profile.u, profile.v):
        u, g = s * float(u), s * abs(float(v))
        if u <= exclude or u >= umax - exclude:
            continue
        branch = Branch.OUTER if r > 0 else Branch.INNER
        rows.append((float(r), u, branch.value, gradient_ratio(n, m, u, g, branch),
                     w_functional(n, m, u, g * g, branch)))
    return rows


def nariai_profile_ratios(profile, exclude=ENDPOINT_TOL):
    """Per-sample :func:`nariai_ratio` of a profile normalized to ``max u = 1``."""
    rows = []
    for r, u, v in zip(profile.r, profile.u, profile.v):
        un = float(u) / profile.gauge
        if un >= 1.0 - exclude:
            continue
        rows.append((float(r), un, nariai_ratio(profile.n, max(un, 0.0), abs(float(v)) / profile.gauge)))
    return rows


__all__ = ["Branch", "psi", "model_gradient", "gradient_ratio", "w_functional", "nariai_ratio",
           "profile_ratios", "nariai_profile_ratios", "ENDPOINT_TOL"]
