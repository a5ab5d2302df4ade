"""Sampled radial solutions in Gauss gauge ``g = dr^2 + rho(r)^2 g_Sigma``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError

CSV_COLUMNS = ("r", "rho", "u", "dudr", "drhodr", "constraint_residual")
FAMILIES = ("bk", "nariai", "evolved")


def fmt15(x):
    """Round a float to 15 significant digits (None and non-floats pass through)."""
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.15g}")
    if isinstance(x, dict):
        return {k: fmt15(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt15(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


def constraint_residual(n, kappa, rho, u, v, w):
    """First integral ``2 rho w v - u [(n-2)(kappa - w^2) - n rho^2]`` of the reduced system."""
    return 2.0 * rho * w * v - u * ((n - 2) * (kappa - w * w) - n * rho * rho)


@dataclass(frozen=True)
class RadialProfile:
    """Samples ``(r, rho, u, du/dr, drho/dr)`` of a warped static solution.

    ``r`` is the signed distance to the maximum set of the lapse, ``rho`` the
    areal radius of the fiber, ``u`` the lapse, ``v = du/dr`` and ``w =
    drho/dr``.  ``gauge`` is the value of ``u`` on the maximum set.
    """

    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    c_res: np.ndarray
    gauge: float
    family: str
    n: int
    m: float | None = None
    kappa: float = 1.0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown profile family {self.family!r}")
        arrays = [np.asarray(getattr(self, k), dtype=float) for k in ("r", "rho", "u", "v", "w", "c_res")]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise DomainError("profile columns must be 1-d arrays of equal length")
        for k, a in zip(("r", "rho", "u", "v", "w", "c_res"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, k, a)
        if np.any(np.diff(self.r) <= 0):
            raise DomainError("profile r must be strictly increasing")

    def __len__(self):
        return self.r.size

    @property
    def origin_index(self) -> int:
        """Index of the sample nearest ``r = 0``."""
        return int(np.argmin(np.abs(self.r)))

    def has_origin(self, atol=1e-14) -> bool:
        return abs(self.r[self.origin_index]) <= atol

    def sample(self, i):
        return {k: float(getattr(self, k)[i]) for k in ("r", "rho", "u", "v", "w", "c_res")}

    def scaled(self, factor):
        """The same geometry with the lapse multiplied by ``factor``."""
        return RadialProfile(self.r, self.rho, factor * self.u, factor * self.v, self.w,
                             factor * self.c_res, factor * self.gauge, self.family, self.n,
                             self.m, self.kappa, dict(self.tolerances))

    def check(self, constraint_tol=1e-8, v_tol=1e-10):
        """Raise ``DomainError`` if a profile invariant is violated."""
        interior = self.u[1:-1]
        if interior.size and np.any(interior <= 0):
            raise DomainError("lapse must be positive at interior samples")
        i0 = self.origin_index
        if abs(self.v[i0]) > v_tol * max(1.0, abs(self.gauge)):
            raise DomainError(f"du/dr = {self.v[i0]:.3e} at the sample nearest r = 0")
        worst = float(np.max(np.abs(self.c_res)))
        if worst > constraint_tol:
            raise DomainError(f"constraint residual {worst:.3e} exceeds {constraint_tol:.1e}")

    # -- serialization ---------------------------------------------------

    def manifest(self):
        return fmt15({
            "family": self.family,
            "n": self.n,
            "m": self.m,
            "gauge": self.gauge,
            "kappa": self.kappa,
            "samples": len(self),
            "tolerances": dict(self.tolerances),
        })

    def to_csv(self, path):
        table = np.column_stack([self.r, self.rho, self.u, self.v, self.w, self.c_res])
        np.savetxt(path, table, fmt="%.15g", delimiter=",", header=",".join(CSV_COLUMNS), comments="")

    def write(self, csv_path):
        """Write the CSV and a ``.json`` manifest next to it."""
        csv_path = Path(csv_path)
        self.to_csv(csv_path)
        csv_path.with_suffix(".json").write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path, *, n=None, family=None, m=None, gauge=None, kappa=None):
        """Load a profile CSV; metadata comes from the sibling manifest unless given."""
        path = Path(path)
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise DomainError(f"unexpected CSV header {header}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = {}
        mpath = path.with_suffix(".json")
        if mpath.exists():
            meta = json.loads(mpath.read_text())
        n = n if n is not None else meta.get("n")
        if n is None:
            raise DomainError("dimension unknown: no manifest and no n given")
        gauge = gauge if gauge is not None else meta.get("gauge")
        if gauge is None:
            gauge = float(np.max(data[:, 2]))
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4], data[:, 5],
                   gauge=float(gauge), family=family or meta.get("family", "evolved"), n=int(n),
                   m=m if m is not None else meta.get("m"),
                   kappa=kappa if kappa is not None else meta.get("kappa", 1.0),
                   tolerances=meta.get("tolerances", {}))
