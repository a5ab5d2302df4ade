"""Grid estimates of forward and reverse Lojasiewicz inequalities ``|grad f|^2 ~ c (f_max - f)^theta``.

Fields live on uniform rectangular grids (``values[i, j] = f(x[i], y[j])``)
or on a flat torus, where the grid omits the right endpoint of each period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, stats
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError
from .models import BKParameters, bk_profile

MIN_POINTS = 32
MIN_FIT_SAMPLES = 16
BUILTINS = ("neg_x2y2", "neg_x2y4", "torus_sin2sin2", "bk_lapse_radial")

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    periodic: bool = False
    f_max: float | None = None
    name: str = "field"

    def __post_init__(self):
        x, y = np.asarray(self.x, dtype=float), np.asarray(self.y, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if x.size < MIN_POINTS or y.size < MIN_POINTS:
            raise DomainError(f"grid needs at least {MIN_POINTS} points per axis")
        if values.shape != (x.size, y.size):
            raise DomainError(f"values shape {values.shape} does not match grid {(x.size, y.size)}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        for a in (x, y):
            d = np.diff(a)
            if np.any(d <= 0) or np.ptp(d) > 1e-9 * d[0]:
                raise DomainError("grid must be uniform and increasing")
        for k, a in (("x", x), ("y", y), ("values", values)):
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @property
    def spacing(self):
        return self.x[1] - self.x[0], self.y[1] - self.y[0]

    @property
    def top(self):
        """``f_max``: the analytic value when known, otherwise the largest sample."""
        return float(self.values.max()) if self.f_max is None else float(self.f_max)

    @property
    def periods(self):
        hx, hy = self.spacing
        return self.x.size * hx, self.y.size * hy

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def with_values(self, values, name=None, f_max=None):
        return ScalarField2D(self.x, self.y, values, self.periodic, f_max, name or self.name)


def _axis(a, b, points, periodic=False):
    if periodic:
        return a + (b - a) * np.arange(points) / points
    return np.linspace(a, b, points)


def _bk_radial(points, n=3, m=0.1, half_width=0.75):
    params = BKParameters(n, m)
    prof = bk_profile(params, samples_per_side=2000)
    spline = CubicHermiteSpline(prof.r, prof.u, prof.v)
    x = _axis(-half_width, half_width, points)
    X, Y = np.meshgrid(x, x, indexing="ij")
    r = np.hypot(X, Y) - params.r_zero
    inside = (r >= prof.r[0]) & (r <= prof.r[-1])
    values = np.where(inside, spline(np.clip(r, prof.r[0], prof.r[-1])), 0.0)
    return ScalarField2D(x, x, values, False, params.u_max, "bk_lapse_radial")


def builtin_field(name, points=512, domain=None, **params) -> ScalarField2D:
    """Sample a named test field.

    ``neg_x2y2`` and ``neg_x2y4`` default to ``[-2, 2]^2``; ``torus_sin2sin2``
    is ``-sin^2 x sin^2 y`` on the torus ``[0, 2 pi)^2``; ``bk_lapse_radial``
    is the BK lapse (``n``, ``m`` keywords) as a function of the geodesic
    distance ``|p| - r_0`` to the circle ``|p| = r_0``, on ``[-0.75, 0.75]^2``.
    """
    if name not in BUILTINS:
        raise DomainError(f"unknown field {name!r}; choose from {', '.join(BUILTINS)}")
    if name == "bk_lapse_radial":
        return _bk_radial(points, **params)
    if params:
        raise DomainError(f"field {name!r} takes no parameters")
    periodic = name == "torus_sin2sin2"
    if domain is None:
        domain = (0.0, 2 * math.pi, 0.0, 2 * math.pi) if periodic else (-2.0, 2.0, -2.0, 2.0)
    x = _axis(domain[0], domain[1], points, periodic)
    y = _axis(domain[2], domain[3], points, periodic)
    X, Y = np.meshgrid(x, y, indexing="ij")
    if name == "neg_x2y2":
        values = -(X * X) * (Y * Y)
    elif name == "neg_x2y4":
        values = -(X * X) * Y**4
    else:
        values = -np.sin(X) ** 2 * np.sin(Y) ** 2
    return ScalarField2D(x, y, values, periodic, 0.0, name)


# -- maximum set -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MaxSet:
    mask: np.ndarray
    labels: np.ndarray
    count: int

    @property
    def size(self):
        return int(self.mask.sum())


def detect_max_set(fld: ScalarField2D, tol=1e-9) -> MaxSet:
    """Grid points with ``f >= f_max - tol``, split into 8-connected components (wrapping on a torus)."""
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    mask = fld.values >= fld.top - tol
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if fld.periodic and count > 1:
        parent = list(range(count + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def join(edge_a, edge_b):
            for shift in (-1, 0, 1):
                b = np.roll(edge_b, shift)
                for la, lb in zip(edge_a, b):
                    if la and lb:
                        ra, rb = find(int(la)), find(int(lb))
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)

        join(labels[0, :], labels[-1, :])
        join(labels[:, 0], labels[:, -1])
        roots = sorted({find(k) for k in range(1, count + 1)})
        remap = np.zeros(count + 1, dtype=int)
        for k in range(1, count + 1):
            remap[k] = roots.index(find(k)) + 1
        labels, count = remap[labels], len(roots)
    return MaxSet(mask, labels, int(count))


# -- finite differences --------------------------------------------------

_EDGE2 = (np.array([-3.0, 4.0, -1.0]) / 2.0,)
_EDGE4 = (np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
          np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0)


def _derivative(values, h, axis, periodic, order):
    f = np.moveaxis(values, axis, 0)
    if periodic:
        if order == 2:
            d = (np.roll(f, -1, 0) - np.roll(f, 1, 0)) / (2 * h)
        else:
            d = (8 * (np.roll(f, -1, 0) - np.roll(f, 1, 0)) - (np.roll(f, -2, 0) - np.roll(f, 2, 0))) / (12 * h)
        return np.moveaxis(d, 0, axis)
    d = np.empty_like(f)
    if order == 2:
        d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        edges = _EDGE2
    else:
        d[2:-2] = (8 * (f[3:-1] - f[1:-3]) - (f[4:] - f[:-4])) / (12 * h)
        edges = _EDGE4
    width = edges[0].size
    for i, w in enumerate(edges):
        d[i] = np.tensordot(w, f[:width], axes=1) / h
        d[-1 - i] = -np.tensordot(w, f[::-1][:width], axes=1) / h
    return np.moveaxis(d, 0, axis)


def gradient_sq(fld: ScalarField2D, order=2) -> ScalarField2D:
    """``|grad f|^2`` by centered differences of the given order (2 or 4), one-sided of the same order at edges."""
    if order not in (2, 4):
        raise DomainError("finite-difference order must be 2 or 4")
    hx, hy = fld.spacing
    fx = _derivative(fld.values, hx, 0, fld.periodic, order)
    fy = _derivative(fld.values, hy, 1, fld.periodic, order)
    return fld.with_values(fx * fx + fy * fy, name=f"|grad {fld.name}|^2")


def _second(values, h, axis, periodic):
    f = np.moveaxis(values, axis, 0)
    if periodic:
        d = (np.roll(f, -1, 0) - 2 * f + np.roll(f, 1, 0)) / (h * h)
    else:
        d = np.empty_like(f)
        d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
        d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)
        d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return np.moveaxis(d, 0, axis)


def laplacian(values, fld: ScalarField2D):
    """Second-order five-point Laplacian of ``values`` on the grid of ``fld``."""
    hx, hy = fld.spacing
    return _second(values, hx, 0, fld.periodic) + _second(values, hy, 1, fld.periodic)


# -- windows and fits ----------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Annulus ``inner <= dist <= outer``.

    The distance is to ``center`` or, when ``center`` is ``None``, to the
    detected maximum set.
    """

    inner: float
    outer: float
    center: tuple | None = None

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise DomainError(f"window radii must satisfy 0 <= inner < outer, got ({self.inner}, {self.outer})")


def window_distance(fld: ScalarField2D, window: Window, tol=1e-9):
    hx, hy = fld.spacing
    if window.center is not None:
        cx, cy = window.center
        X, Y = fld.mesh()
        dx, dy = X - cx, Y - cy
        if fld.periodic:
            px, py = fld.periods
            dx = (dx + px / 2) % px - px / 2
            dy = (dy + py / 2) % py - py / 2
        return np.hypot(dx, dy)
    mask = detect_max_set(fld, tol).mask
    if not fld.periodic:
        return ndimage.distance_transform_edt(~mask, sampling=(hx, hy))
    nx, ny = mask.shape
    tiled = np.tile(mask, (3, 3))
    dist = ndimage.distance_transform_edt(~tiled, sampling=(hx, hy))
    return dist[nx:2 * nx, ny:2 * ny]


def window_components(fld: ScalarField2D, window: Window, tol=1e-9):
    """Labels of the maximum-set components with a point inside the window's outer radius."""
    ms = detect_max_set(fld, tol)
    if window.center is None:
        return tuple(range(1, ms.count + 1))
    near = window_distance(fld, window) <= window.outer
    return tuple(int(k) for k in np.unique(ms.labels[near & ms.mask]))


def gap_floor(f_max):
    return 1e2 * _EPS * abs(f_max) + 1e-300


def window_samples(fld: ScalarField2D, window: Window, order=4):
    """``(gap, grad_sq, dist)`` at window points with ``f_max - f`` above the floor and nonzero gradient."""
    dist = window_distance(fld, window)
    gap = fld.top - fld.values
    grad = gradient_sq(fld, order).values
    keep = (dist >= window.inner) & (dist <= window.outer) & (gap > gap_floor(fld.top)) & (grad > 0)
    return gap[keep], grad[keep], dist[keep]


@dataclass(frozen=True)
class ExponentFit:
    theta: float
    c: float
    r2: float
    window: Window
    sample_count: int
    log_gap: np.ndarray = field(repr=False, compare=False, default=None)
    log_grad_sq: np.ndarray = field(repr=False, compare=False, default=None)


def fit_exponent(fld: ScalarField2D, window: Window, order=4) -> ExponentFit:
    """Least-squares fit of ``log |grad f|^2 = theta log(f_max - f) + log c`` over the window."""
    gap, grad, _ = window_samples(fld, window, order)
    if gap.size < MIN_FIT_SAMPLES:
        raise DomainError(f"too few samples in window: {gap.size} < {MIN_FIT_SAMPLES}")
    lg, lv = np.log(gap), np.log(grad)
    if np.ptp(lg) < 1e-12:
        raise DomainError("degenerate spread: f_max - f is constant over the window")
    fit = stats.linregress(lg, lv)
    return ExponentFit(float(fit.slope), float(math.exp(fit.intercept)), float(fit.rvalue**2), window,
                       int(gap.size), lg, lv)


@dataclass(frozen=True)
class InequalityReport:
    kind: str
    theta: float
    c: float
    sample_count: int
    passed: bool
    detail: dict = field(default_factory=dict)


def verify_forward(fld: ScalarField2D, fit, window: Window, order=4) -> InequalityReport:
    """Check ``|grad f|^2 >= c (f_max - f)^theta`` on the window with ``c = 0.9 * min ratio``.

    ``fit`` is an :class:`ExponentFit` or a bare exponent; the inequality
    only holds with ``theta < 2``.
    """
    theta = fit.theta if isinstance(fit, ExponentFit) else float(fit)
    if not theta < 2:
        raise DomainError(f"forward inequality needs theta < 2, got {theta}")
    gap, grad, _ = window_samples(fld, window, order)
    if gap.size == 0:
        raise DomainError("window contains no admissible samples")
    ratio = grad / gap**theta
    c = 0.9 * float(ratio.min())
    holds = bool(np.all(grad >= c * gap**theta))
    return InequalityReport("forward", theta, c, int(gap.size), holds and c > 0 and math.isfinite(c),
                            {"min_ratio": float(ratio.min())})


def verify_reverse(fld: ScalarField2D, theta, window: Window, order=4) -> InequalityReport:
    """Certify ``|grad f|^2 <= c (f_max - f)^theta`` on the window for ``theta < 1``.

    ``c`` is the largest ratio over the window.  The bound is accepted when
    it is finite and the largest ratio on the inner half of the window does
    not exceed the one on the outer half, i.e. the ratio stays bounded on
    approach to the maximum set rather than growing towards it.
    """
    theta = float(theta)
    if not 0 < theta < 1:
        raise DomainError(f"reverse inequality needs 0 < theta < 1, got {theta}")
    gap, grad, dist = window_samples(fld, window, order)
    if gap.size == 0:
        raise DomainError("window contains no admissible samples")
    ratio = grad / gap**theta
    c = float(ratio.max())
    mid = 0.5 * (window.inner + window.outer)
    near, far = ratio[dist < mid], ratio[dist >= mid]
    c_near = float(near.max()) if near.size else 0.0
    c_far = float(far.max()) if far.size else 0.0
    passed = math.isfinite(c) and c_near <= c_far
    return InequalityReport("reverse", theta, c, int(gap.size), bool(passed),
                            {"c_near": c_near, "c_far": c_far})


# -- elliptic identity -----------------------------------------------------


def elliptic_identity_residual(fld: ScalarField2D, c, theta, f_top=None):
    """Finite-difference residual of the identity satisfied by ``w = |grad f|^2 - c (f_max - f)^theta``.

    With ``F = c (f_max - f)^(theta - 1)`` the residual is
    ``Laplace w - c theta (1-theta) (f_max - f)^(theta-2) w - theta F (Laplace f + (1-theta) F)
    - Laplace |grad f|^2``, which vanishes for exact derivatives.  Points with
    ``f_max - f`` at or below the floor are returned as NaN.  ``f_top``
    replaces ``f_max`` (e.g. a window supremum for fields without a maximum).
    """
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if not c > 0:
        raise DomainError("c must be positive")
    top = fld.top if f_top is None else float(f_top)
    gap = top - fld.values
    ok = gap > gap_floor(top)
    g = np.where(ok, gap, 1.0)
    grad = gradient_sq(fld, 2).values
    w = grad - c * g**theta
    F = c * g ** (theta - 1)
    res = (laplacian(w, fld) - c * theta * (1 - theta) * g ** (theta - 2) * w
           - theta * F * (laplacian(fld.values, fld) + (1 - theta) * F) - laplacian(grad, fld))
    return np.where(ok, res, np.nan)


def identity_convergence(build, c, theta, sizes, region):
    """Largest residual over ``region = (x0, x1, y0, y1)`` for each grid size and the observed orders.

    ``build(points)`` returns the field sampled on ``points`` per axis.
    """
    x0, x1, y0, y1 = region
    maxima = []
    for n in sizes:
        fld = build(n)
        res = elliptic_identity_residual(fld, c, theta)
        X, Y = fld.mesh()
        sel = (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)
        vals = res[sel]
        if vals.size == 0 or np.isnan(vals).any():
            raise DomainError("region is empty or touches excluded near-maximum points")
        maxima.append(float(np.max(np.abs(vals))))
    spacing = [1.0 / n for n in sizes]
    orders = [math.log(a / b) / math.log(ha / hb)
              for a, b, ha, hb in zip(maxima, maxima[1:], spacing, spacing[1:])]
    return maxima, orders


__all__ = ["ScalarField2D", "builtin_field", "MaxSet", "detect_max_set", "gradient_sq", "laplacian",
           "Window", "window_distance", "window_components", "window_samples", "ExponentFit", "fit_exponent", "InequalityReport",
           "verify_forward", "verify_reverse", "elliptic_identity_residual", "identity_convergence", "BUILTINS"]
