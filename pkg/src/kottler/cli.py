"""Command-line front end: ``kottler <command> [options]``.

Every command prints a JSON report ``{run_id, config, verdicts, ...}`` and
exits with 0 when all verdicts pass, 1 when any check fails and 2 on usage
or configuration errors.  Options may also come from a ``key = value``
config file (``--config``); flags given on the command line win.  Relative
output paths are resolved against ``--output-dir``, which defaults to the
``KOTTLER_OUTPUT_DIR`` environment variable or the working directory.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import cauchy, expansions, lojasiewicz, mass, models, pseudo_radial
from .errors import DomainError, KottlerError
from .profile import RadialProfile, fmt15

OUTPUT_ENV = "KOTTLER_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Verdict:
    """One named check; it passes iff ``|value - expected| <= tolerance``."""

    name: str
    value: float | None
    expected: float | None
    tolerance: float | None
    status: str = ""
    message: str = ""

    def __post_init__(self):
        if not self.status:
            ok = (self.value is not None and self.expected is not None and self.tolerance is not None
                  and math.isfinite(self.value) and abs(self.value - self.expected) <= self.tolerance)
            object.__setattr__(self, "status", "pass" if ok else "fail")

    @classmethod
    def error(cls, name, message):
        return cls(name, None, None, None, status="error", message=str(message))

    @property
    def passed(self):
        return self.status == "pass"


def _floats(text):
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _range(text):
    """``a:b:count`` (inclusive linspace) or a comma-separated list."""
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
        try:
            a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
        if k < 0:
            raise argparse.ArgumentTypeError("range count must be nonnegative")
        return tuple(np.linspace(a, b, k).tolist()) if k != 1 else (a,)
    return _floats(text)


# -- parser ----------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="key = value file with defaults for this command")
    p.add_argument("--output-dir", dest="output_dir", help=f"base directory for outputs (env {OUTPUT_ENV})")
    p.add_argument("--report", help="also write the JSON report to this file")


def build_parser():
    parser = argparse.ArgumentParser(prog="kottler", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    registry = {}

    p = sub.add_parser("model", help="sample a BK or Nariai model profile")
    p.add_argument("--family", choices=("bk", "nariai"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--gauge", type=float, help="lapse on the maximum set (default u_max)")
    p.add_argument("--normalize", action="store_true", help="use the gauge max u = 1")
    p.add_argument("--samples", type=int, help="samples per side")
    p.add_argument("--out", help="profile CSV path")
    registry[("model",)] = p

    p = sub.add_parser("mass", help="classify a surface gravity and invert it to a virtual mass")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=float)
    p.add_argument("--class", dest="region_class", choices=("outer", "inner", "cylindrical"))
    registry[("mass",)] = p

    p = sub.add_parser("evolve", help="radial Cauchy evolution from the maximum set")
    p.add_argument("--n", type=int)
    p.add_argument("--rho0", type=float)
    p.add_argument("--gauge", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--direction", choices=("plus", "minus", "both"))
    p.add_argument("--tol", type=float, help="relative integrator tolerance")
    p.add_argument("--method", choices=("adaptive", "rk4"))
    p.add_argument("--step", type=float, help="fixed step for rk4")
    p.add_argument("--max-range", dest="max_range", type=float)
    p.add_argument("--out", help="profile CSV path")
    registry[("evolve",)] = p

    p = sub.add_parser("psi", help="pseudo-radial value and model gradient of a lapse value")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--u", type=float)
    p.add_argument("--branch", choices=("outer", "inner"))
    p.add_argument("--grad", type=float, help="optional |grad u| for the gradient ratio")
    registry[("psi",)] = p

    p = sub.add_parser("verify", help="verification runs")
    vsub = p.add_subparsers(dest="check", metavar="check")
    q = vsub.add_parser("gradest", help="gradient estimate along a profile CSV")
    q.add_argument("--profile")
    q.add_argument("--m", type=float, help="model mass (default from the profile manifest)")
    q.add_argument("--tol", type=float)
    q.add_argument("--out", help="per-sample CSV path")
    registry[("verify", "gradest")] = q
    q = vsub.add_parser("expansion", help="remainder orders of the expansions on a BK model")
    q.add_argument("--n", type=int)
    q.add_argument("--m", type=float)
    q.add_argument("--order", type=int, choices=(3, 4))
    q.add_argument("--grid", type=_floats, help="dyadic radii (default 0.1,0.05,0.025,0.0125)")
    q.add_argument("--out", help="convergence table CSV path")
    registry[("verify", "expansion")] = q
    q = vsub.add_parser("limits", help="gradient limit at the maximum set and surface-gravity limits")
    q.add_argument("--n", type=int)
    q.add_argument("--m", type=float)
    q.add_argument("--r", type=_floats, help="radii for the gradient quotient (default 1e-3)")
    q.add_argument("--tol", type=float, help="relative tolerance on the gradient limit")
    registry[("verify", "limits")] = q
    q = vsub.add_parser("roundtrip", help="evolve a datum both ways and recover the virtual masses")
    q.add_argument("--n", type=int)
    q.add_argument("--rho0", type=float)
    q.add_argument("--tol", type=float, help="mass tolerance")
    registry[("verify", "roundtrip")] = q
    for q in vsub.choices.values():
        _common(q)

    p = sub.add_parser("loja", help="Lojasiewicz exponent fits and inequality checks")
    p.add_argument("--field", choices=lojasiewicz.BUILTINS)
    p.add_argument("--points", type=int)
    p.add_argument("--center", type=_floats, help="X,Y (omit to measure distance to the maximum set)")
    p.add_argument("--window", type=_floats, help="R1,R2")
    p.add_argument("--theta", type=float)
    p.add_argument("--c", type=float, help="constant for the identity mode")
    p.add_argument("--mode", choices=("fit", "forward", "reverse", "identity"))
    p.add_argument("--pairs-out", dest="pairs_out", help="CSV of (log gap, log |grad f|^2) pairs")
    registry[("loja",)] = p

    p = sub.add_parser("sweep", help="grid of independent cases run concurrently")
    p.add_argument("--kind", choices=("roundtrip", "monotonicity"))
    p.add_argument("--n", type=_ints, help="dimensions, comma separated")
    p.add_argument("--masses", type=_range, help="start:stop:count or a list (roundtrip)")
    p.add_argument("--workers", type=int)
    registry[("sweep",)] = p

    for key, p in registry.items():
        if len(key) == 1:
            _common(p)
    return parser, registry


DEFAULTS = {
    ("model",): {"family": "bk", "samples": 400, "normalize": False},
    ("mass",): {},
    ("evolve",): {"kappa": 1.0, "gauge": 1.0, "direction": "both", "tol": 1e-10, "method": "adaptive",
                  "step": 1e-3, "max_range": 10.0},
    ("psi",): {},
    ("verify", "gradest"): {"tol": 1e-8},
    ("verify", "expansion"): {"order": 4},
    ("verify", "limits"): {"r": (1e-3,), "tol": 1e-3},
    ("verify", "roundtrip"): {"tol": 1e-6},
    ("loja",): {"points": 512, "mode": "fit", "window": (0.01, 0.1)},
    ("sweep",): {"kind": "roundtrip", "n": (3,), "workers": 4},
}

PATH_KEYS = ("out", "report", "pairs_out", "config", "output_dir", "profile")


def _read_config(path):
    entries = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err.strerror}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key.replace("-", "_")] = value
    return entries


def _apply_config(sub, entries):
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    out = {}
    for key, raw in entries.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean, got {raw!r}")
            out[key] = low in ("true", "1", "yes")
            continue
        try:
            value = action.type(raw) if action.type else raw
        except (argparse.ArgumentTypeError, ValueError) as err:
            raise UsageError(f"config key {key!r}: {err}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r} must be one of {', '.join(map(str, action.choices))}")
        out[key] = value
    return out


def parse(argv):
    parser, registry = build_parser()
    first = parser.parse_args(argv)
    if first.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a command is required")
    key = (first.command,) if first.command != "verify" else ("verify", first.check)
    if key == ("verify", None):
        raise UsageError("verify needs a check: gradest, expansion, limits or roundtrip")
    sub = registry[key]
    merged = dict(DEFAULTS[key])
    if first.config:
        merged.update(_apply_config(sub, _read_config(first.config)))
    sub.set_defaults(**merged)
    args = parser.parse_args(argv)
    return key, args


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")


def _output_path(args, value):
    if value is None:
        return None
    base = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
    path = Path(value)
    if not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _config_of(key, args):
    cfg = {"command": " ".join(key)}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "check", "config", "output_dir", "workers") or v is None:
            continue
        cfg[k] = list(v) if isinstance(v, tuple) else v
    return fmt15(cfg)


def run_id(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _dump(obj):
    return json.dumps(fmt15(obj), indent=2, sort_keys=True) + "\n"


# -- commands ----------------------------------------------------------------


def cmd_model(args):
    extra = {}
    if args.family == "nariai":
        _require(args, "n")
        gauge = 1.0 if args.gauge is None else args.gauge
        prof = models.nariai_profile(args.n, samples=2 * args.samples + 1, gauge=gauge)
        verdicts = [Verdict("constraint_max", float(np.max(np.abs(prof.c_res))), 0.0, 1e-10)]
    else:
        _require(args, "n", "m")
        params = models.BKParameters(args.n, args.m)
        gauge = 1.0 if args.normalize else args.gauge
        prof = models.bk_profile(params, gauge=gauge, samples_per_side=args.samples)
        s = prof.gauge / params.u_max
        u2 = models.lapse_squared(params.n, params.m, prof.rho)[0] * s * s
        extra = {"r_minus": params.r_minus, "r_plus": params.r_plus, "r_zero": params.r_zero,
                 "u_max": params.u_max, "horizon_r": [float(prof.r[0]), float(prof.r[-1])]}
        verdicts = [
            Verdict("root_residual_minus", abs(models.lapse_squared(params.n, params.m, params.r_minus)[0]), 0.0, 1e-10),
            Verdict("root_residual_plus", abs(models.lapse_squared(params.n, params.m, params.r_plus)[0]), 0.0, 1e-10),
            Verdict("lapse_squared_max_dev", float(np.max(np.abs(prof.u**2 - u2))), 0.0, 1e-8),
            Verdict("constraint_max", float(np.max(np.abs(prof.c_res))), 0.0, 1e-10),
        ]
    out = _output_path(args, args.out)
    if out:
        prof.write(out)
        extra["profile"] = str(out)
    extra["samples"] = len(prof)
    return verdicts, extra


def cmd_mass(args):
    _require(args, "n", "k")
    report = mass.mass_report(args.n, args.k, args.region_class)
    return [Verdict("inversion_residual", report["residual"], 0.0, 1e-8)], report


def cmd_evolve(args):
    _require(args, "n", "rho0")
    data = cauchy.initial_data(args.n, args.rho0, args.gauge, args.kappa)
    controls = cauchy.EvolveControls(method=args.method, rtol=args.tol, step=args.step, max_range=args.max_range)
    if args.direction == "both":
        prof, horizons = cauchy.evolve_both(data, controls)
    else:
        prof, h = cauchy.evolve(data, args.direction, controls)
        horizons = {args.direction: h}
    hs, masses, verdicts = [], {}, []
    for side, h in horizons.items():
        if h is None:
            verdicts.append(Verdict.error(f"horizon_{side}", f"no horizon within r = {args.max_range}"))
            continue
        hs.append(asdict(h))
        if data.kappa == 1.0:
            rep = mass.mass_report(data.n, h.k)
            masses[side] = {"class": rep["class"], "m": rep["m"]}
    cmax = float(np.max(np.abs(prof.c_res))) / data.gauge
    verdicts.append(Verdict("constraint_max", cmax, 0.0, 1e-9))
    verdicts.append(Verdict("invariant_max", cauchy.invariant_drift(prof, data.w0) / data.gauge, 0.0, 1e-9))
    extra = {"horizons": hs, "masses": masses, "constraint_max": cmax, "w0": data.w0, "lambda": data.lam}
    out = _output_path(args, args.out)
    if out:
        prof.write(out)
        extra["profile"] = str(out)
    return verdicts, extra


def cmd_psi(args):
    _require(args, "n", "m", "u", "branch")
    value = pseudo_radial.psi(args.n, args.m, args.u, args.branch)
    extra = {"psi": value, "model_gradient": pseudo_radial.model_gradient(args.n, args.m, value)}
    residual = abs(models.lapse_squared(args.n, args.m, value)[0] - args.u**2)
    if args.grad is not None:
        extra["gradient_ratio"] = pseudo_radial.gradient_ratio(args.n, args.m, args.u, args.grad, args.branch)
        extra["w"] = pseudo_radial.w_functional(args.n, args.m, args.u, args.grad**2, args.branch)
    return [Verdict("psi_residual", residual, 0.0, 1e-10)], extra


def cmd_gradest(args):
    _require(args, "profile")
    try:
        prof = RadialProfile.from_csv(args.profile)
    except OSError as err:
        raise UsageError(f"cannot read profile {args.profile}: {err.strerror}") from None
    tol = args.tol
    if prof.family == "nariai":
        rows = pseudo_radial.nariai_profile_ratios(prof)
        header = ("r", "u_normalized", "ratio")
        ratios = [row[2] for row in rows]
        verdicts = [Verdict("ratio_excess", max(0.0, max(ratios) - 1.0), 0.0, tol)]
    else:
        m = args.m if args.m is not None else prof.m
        if m is None:
            raise UsageError("profile manifest has no mass; pass --m")
        rows = pseudo_radial.profile_ratios(prof, m)
        header = ("r", "u", "branch", "ratio", "w")
        ratios = [row[3] for row in rows]
        ws = [row[4] for row in rows]
        verdicts = [Verdict("ratio_excess", max(0.0, max(ratios) - 1.0), 0.0, tol),
                    Verdict("w_deficit", max(0.0, -min(ws)), 0.0, tol)]
    out = _output_path(args, args.out)
    extra = {"samples": len(rows), "ratio_min": min(ratios), "ratio_max": max(ratios)}
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([f"{v:.15g}" if isinstance(v, float) else v for v in row])
        extra["table"] = str(out)
    return verdicts, extra


def cmd_expansion(args):
    _require(args, "n", "m")
    params = models.BKParameters(args.n, args.m)
    H = (params.n - 1) * params.u_max / params.r_zero
    grid = args.grid or expansions.dyadic_grid()
    if args.order == 4:
        rep = expansions.remainder_order(
            expansions.bk_lapse_sampler(params),
            lambda r: expansions.expand_lapse(params.n, params.u_max, H, 0.0, r), 4, grid)
        label = "lapse"
    else:
        rep = expansions.remainder_order(
            expansions.bk_rho_sampler(params),
            lambda r: expansions.expand_psi(params.n, params.m, H, 0.0, r), 3, grid)
        label = "psi"
    out = _output_path(args, args.out)
    extra = {"expansion": label, "normalized": list(rep.normalized), "growth": list(rep.growth)}
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("r", "exact", "expansion", "normalized_remainder"))
            for row in rep.rows():
                writer.writerow([f"{v:.15g}" for v in row])
        extra["table"] = str(out)
    # growth factors are nonnegative, so |growth| below 2 is the remainder-order criterion
    return [Verdict(f"remainder_growth_max_p{args.order}", max(rep.growth), 0.0, math.nextafter(2.0, 0.0))], extra


def cmd_limits(args):
    _require(args, "n", "m")
    params = models.BKParameters(args.n, args.m)
    target = expansions.gradient_limit(-params.n * params.u_max)
    verdicts, quotients = [], {}
    for r in args.r:
        q = expansions.limit_quotient(params, r)
        quotients[f"{r:.15g}"] = q
        verdicts.append(Verdict(f"gradient_limit_r={r:.6g}", q / target - 1.0, 0.0, args.tol))
    k_ds = mass.surface_gravity(params.n, 1e-6, "plus").k
    verdicts.append(Verdict("de_sitter_k_plus", k_ds, 1.0, 1e-3))
    return verdicts, {"gradient_limit": target, "quotients": quotients}


def cmd_roundtrip(args):
    _require(args, "n", "rho0")
    rep = cauchy.round_trip(args.n, args.rho0, tol=args.tol)
    verdicts = [Verdict("m_outer", rep["m_outer"], rep["m_expected"], args.tol),
                Verdict("m_inner", rep["m_inner"], rep["m_expected"], args.tol),
                Verdict("classes", 0.0 if rep["passed"] else 1.0, 0.0, 0.0)]
    if rep["model_deviation"] is not None:
        verdicts.append(Verdict("model_deviation", rep["model_deviation"], 0.0, 1e-8))
    return verdicts, rep


def cmd_loja(args):
    _require(args, "field")
    if len(args.window) != 2:
        raise UsageError("--window needs two radii R1,R2")
    if args.center is not None and len(args.center) != 2:
        raise UsageError("--center needs two coordinates X,Y")
    fld = lojasiewicz.builtin_field(args.field, args.points)
    window = lojasiewicz.Window(args.window[0], args.window[1], args.center)
    extra = {"max_set_components": list(lojasiewicz.window_components(fld, window))}
    if args.mode == "identity":
        _require(args, "theta")
        res = lojasiewicz.elliptic_identity_residual(fld, args.c or 1.0, args.theta)
        d = lojasiewicz.window_distance(fld, window)
        sel = (d >= window.inner) & (d <= window.outer) & np.isfinite(res)
        worst = float(np.max(np.abs(res[sel]))) if sel.any() else math.nan
        return [], {**extra, "residual_max": worst, "samples": int(sel.sum())}
    if args.mode == "fit":
        fit = lojasiewicz.fit_exponent(fld, window)
        extra.update(theta=fit.theta, c=fit.c, r2=fit.r2, samples=fit.sample_count)
        verdicts = [Verdict("fit_quality_r2", fit.r2, 1.0, 0.01)]
        if args.pairs_out:
            out = _output_path(args, args.pairs_out)
            np.savetxt(out, np.column_stack([fit.log_gap, fit.log_grad_sq]), fmt="%.15g", delimiter=",",
                       header="log_gap,log_grad_sq", comments="")
            extra["pairs"] = str(out)
        return verdicts, extra
    _require(args, "theta")
    if args.mode == "forward":
        rep = lojasiewicz.verify_forward(fld, args.theta, window)
    else:
        rep = lojasiewicz.verify_reverse(fld, args.theta, window)
    extra.update(theta=rep.theta, c=rep.c, samples=rep.sample_count, **rep.detail)
    return [Verdict(f"{rep.kind}_inequality", 0.0 if rep.passed else 1.0, 0.0, 0.0)], extra


def _sweep_case(kind, case):
    if kind == "monotonicity":
        (n,) = case
        rep = mass.monotonicity_scan(n)
        return [Verdict(f"monotone_n={n}", float(len(rep.offending)), 0.0, 0.0)]
    n, m = case
    try:
        rho0 = ((n - 2) * m) ** (1.0 / n)
        rep = cauchy.round_trip(n, rho0)
    except KottlerError as err:
        return [Verdict.error(f"roundtrip_n={n}_m={m:.6g}", str(err))]
    return [Verdict(f"roundtrip_n={n}_m={m:.6g}_outer", rep["m_outer"], m, 1e-6),
            Verdict(f"roundtrip_n={n}_m={m:.6g}_inner", rep["m_inner"], m, 1e-6)]


def cmd_sweep(args):
    if args.kind == "monotonicity":
        cases = [(n,) for n in args.n]
    else:
        _require(args, "masses")
        cases = [(n, m) for n in args.n for m in args.masses]
    if not cases:
        raise UsageError("empty parameter range")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(lambda c: _sweep_case(args.kind, c), cases))
    verdicts = [v for case in results for v in case]
    return verdicts, {"cases": len(cases)}


COMMANDS = {
    ("model",): cmd_model,
    ("mass",): cmd_mass,
    ("evolve",): cmd_evolve,
    ("psi",): cmd_psi,
    ("verify", "gradest"): cmd_gradest,
    ("verify", "expansion"): cmd_expansion,
    ("verify", "limits"): cmd_limits,
    ("verify", "roundtrip"): cmd_roundtrip,
    ("loja",): cmd_loja,
    ("sweep",): cmd_sweep,
}


def run(argv=None, stdout=None):
    """Run the CLI on ``argv`` and return the exit code."""
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        key, args = parse(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as err:
        print(f"kottler: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        verdicts, extra = COMMANDS[key](args)
    except UsageError as err:
        print(f"kottler: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as err:
        print(f"kottler: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except KottlerError as err:
        verdicts, extra = [Verdict.error(" ".join(key), str(err))], {}
    config = _config_of(key, args)
    report = {"run_id": run_id(config), "config": config, "verdicts": [asdict(v) for v in verdicts], **extra}
    text = _dump(report)
    stdout.write(text)
    if args.report:
        _output_path(args, args.report).write_text(text)
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def main():
    sys.exit(run())
