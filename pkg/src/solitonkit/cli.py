"""Command-line front end.

Exit codes: 0 when every check passes (or a classification is definite), 1 when a
check fails or the input is not a soliton, 2 for usage and input errors.
"""

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .bryant import BryantConfig, asymptotics, integrate
from .classifier import DEFINITE, Thresholds, classify
from .errors import CriticalPointError, GeometryError
from .geometry import PointGeometry
from .level_set import constancy_scan, level_diagnostics
from .soliton import SOLITON_GATE, SolitonChart, point_report
from .warped import WarpedProfile, canonical_fiber, profile_to_chart

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# verification tolerances (relative to 1 + |Rm| where noted in the report)
TOL_ORDER3 = 1e-6
TOL_WEYL_DIV = 1e-4
TOL_BACH = 1e-3
TOL_ENERGY_ANALYTIC = 1e-6
TOL_ENERGY_PROFILE = 1e-4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- JSON output


def _plain(obj):
    """Recursively convert numpy containers and dataclasses to JSON-ready Python values."""
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _emit(obj, indent=0):
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        inner = ",\n".join(pad + "  " + _emit(v, indent + 1) for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f"{pad}  {json.dumps(k)}: {_emit(v, indent + 1)}" for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    return _emit(_plain(obj)) + "\n"


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _document(args, input_desc, settings, points, max_residuals, verdicts, extra=None):
    doc = {
        "input": input_desc,
        "settings": settings,
        "points": points,
        "summary": {"max_residuals": max_residuals, "verdicts": verdicts},
    }
    if extra:
        doc.update(extra)
    if not args.no_meta:
        from importlib.metadata import PackageNotFoundError, version

        try:
            ver = version("artifact")
        except PackageNotFoundError:
            ver = "unknown"
        doc["meta"] = {"generated": datetime.datetime.now(datetime.timezone.utc).isoformat(), "version": ver}
    return doc


# ---------------------------------------------------------------- input resolution


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"catalog parameter {item!r} must look like key=value")
        key, raw = item.split("=", 1)
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


def sidecar_path(csv_path):
    return Path(csv_path).with_suffix(".json")


def load_profile(path, n=None, lam=None):
    """Read a profile CSV; n and lambda come from flags, then the JSON sidecar, then inference."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"cannot read profile {str(path)!r}")
    side = sidecar_path(path)
    if (n is None or lam is None) and side.is_file():
        try:
            info = json.loads(side.read_text()).get("profile", {})
        except (json.JSONDecodeError, AttributeError):
            info = {}
        n = info.get("n") if n is None else n
        lam = info.get("lambda") if lam is None else lam
    return WarpedProfile.from_csv(path, n, lam)


def _resolve(args):
    """(SolitonChart, description, profile or None, is_warped_profile)."""
    if getattr(args, "catalog", None):
        entry = catalog.make(args.catalog, **_parse_params(args.param))
        return entry.soliton, {"catalog": args.catalog, "params": entry.params}, entry.profile
    if getattr(args, "profile", None):
        profile = load_profile(args.profile, args.n, args.lam)
        fiber = canonical_fiber(profile.n - 1, profile.lam)
        r_lo = max(profile.r_min, 0.1) if profile.r_min <= 0 else profile.r_min
        r_hi = min(profile.r_max, max(10.0, r_lo * 10))
        chart, F = profile_to_chart(profile, fiber, r_window=(r_lo, r_hi))
        desc = {"profile": str(args.profile), "n": profile.n, "lambda": profile.lam, "fiber": fiber.label}
        return SolitonChart.steady(chart, F), desc, profile
    raise UsageError("give an input with --catalog NAME or --profile FILE")


def _points(args, s):
    if getattr(args, "point", None):
        pts = []
        for text in args.point:
            try:
                pts.append([float(v) for v in text.split(",")])
            except ValueError:
                raise UsageError(f"bad point {text!r}; use comma-separated coordinates") from None
        return np.array(pts)
    return s.chart.sample(np.random.default_rng(args.seed), args.samples)


# ---------------------------------------------------------------- subcommands


def cmd_tensors(args):
    s, desc, _ = _resolve(args)
    pts = _points(args, s)
    n = s.dim
    rows = []
    for x in pts:
        order = 4 if n >= 4 else (3 if n >= 3 else 2)
        geo = PointGeometry(s.chart, x, order)
        row = {
            "point": x,
            "metric": geo.metric,
            "christoffel": geo.christoffel.value,
            "riemann": geo.riemann.value,
            "ricci": geo.ricci.value,
            "scalar": float(geo.scalar.value),
        }
        if n >= 3:
            row.update(schouten=geo.schouten.value, einstein=geo.einstein.value, weyl=geo.weyl.value,
                       cotton=geo.cotton.value)
        if n >= 4:
            row["bach"] = geo.bach.value
        rows.append(row)
    settings = {"samples": len(pts), "seed": args.seed, "derivative_mode": s.chart.derivative_mode}
    doc = _document(args, desc, settings, rows, {}, {})
    _write(dumps(doc), args.out)
    return EXIT_OK


def _verify_points(s, pts):
    n = s.dim
    prop23 = s.chart.order >= 5 and n >= 3
    rows, reports = [], []
    for x in pts:
        rep = point_report(s, x, with_bach=n >= 4, with_prop23=prop23)
        row = {
            "point": rep.point,
            "soliton_residual": rep.soliton_residual,
            "relative_soliton_residual": rep.relative_soliton_residual,
            "grad_norm": rep.grad_norm,
            "scalar": rep.scalar,
            "hamilton_energy": rep.hamilton_energy,
            "hamilton_grad_residual": rep.hamilton_grad_residual,
            "d_norm": rep.d_norm,
            "d_symmetry": rep.d_symmetry,
            "weyl_divergence_residual": rep.weyl_divergence_residual,
            "bach_residuals": rep.bach_residuals,
            "prop23": rep.prop23,
            "norm_identity": rep.norm_identity,
            "skipped": rep.skipped,
        }
        try:
            lv = level_diagnostics(s, x)
        except CriticalPointError:
            row["level_set"] = None
        else:
            row["level_set"] = {
                "H": lv.H,
                "umbilicity_deficit": lv.umbilicity_deficit,
                "normal_ricci_mix": lv.normal_ricci_mix,
                "normal_ricci": lv.normal_ricci,
                "tangential_ricci_eigs": [list(c) for c in lv.tangential_ricci_eigs],
            }
        rows.append(row)
        reports.append((rep, row["level_set"]))
    return rows, reports


def _max(values):
    vals = [v for v in values if v is not None and math.isfinite(v)]
    return max(vals) if vals else None


def _summarize(s, reports, from_profile):
    mr = {}
    rel = [r.relative_soliton_residual for r, _ in reports]
    mr["relative_soliton_residual"] = _max(rel)
    verdicts = {"is_soliton": mr["relative_soliton_residual"] <= SOLITON_GATE}
    soliton = verdicts["is_soliton"]
    if s.is_steady:
        energies = [r.hamilton_energy for r, _ in reports]
        mr["hamilton_energy_spread"] = float(np.ptp(energies))
        mr["hamilton_energy_mean"] = float(np.mean(energies))
        mr["hamilton_grad_residual"] = _max(r.hamilton_grad_residual for r, _ in reports)
        tol = TOL_ENERGY_PROFILE if from_profile else TOL_ENERGY_ANALYTIC
        if soliton:
            verdicts["hamilton_energy_constant"] = mr["hamilton_energy_spread"] <= tol * (1 + abs(mr["hamilton_energy_mean"]))
            verdicts["hamilton_gradient"] = mr["hamilton_grad_residual"] <= TOL_ORDER3 * (1 + _max(abs(r.scalar) for r, _ in reports))
    if s.dim >= 3:
        syms = [r.d_symmetry for r, _ in reports]
        mr["d_norm"] = _max(r.d_norm for r, _ in reports)
        mr["d_skew"] = _max(d.skew for d in syms)
        mr["d_trace"] = _max(max(d.trace_12, d.trace_13) for d in syms)
        mr["d_contraction"] = _max(d.contraction for d in syms)
        mr["d_methods"] = _max(d.methods for d in syms)
        verdicts["d_skew_trace_free"] = max(mr["d_skew"], mr["d_trace"]) <= TOL_ORDER3
        if soliton:
            verdicts["d_contraction"] = mr["d_contraction"] <= TOL_ORDER3
            verdicts["d_methods_agree"] = mr["d_methods"] <= TOL_ORDER3
        ni = [r.norm_identity.residual for r, _ in reports if r.norm_identity is not None]
        if ni:
            mr["norm_identity"] = max(ni)
            verdicts["norm_identity"] = mr["norm_identity"] <= TOL_ORDER3
    if s.dim >= 4:
        mr["weyl_divergence"] = _max(r.weyl_divergence_residual for r, _ in reports)
        mr["bach_24_vs_23"] = _max(r.bach_residuals.residual_24 for r, _ in reports)
        mr["bach_rmk25"] = _max(r.bach_residuals.residual_rmk25 for r, _ in reports)
        verdicts["weyl_divergence"] = mr["weyl_divergence"] <= TOL_WEYL_DIV
        verdicts["bach_routes_agree"] = mr["bach_24_vs_23"] <= TOL_BACH
        if soliton:
            verdicts["bach_from_d"] = mr["bach_rmk25"] <= TOL_BACH
    p23 = [r.prop23 for r, _ in reports if r.prop23 is not None]
    if p23:
        mr["prop23"] = [_max(getattr(p, k) for p in p23) for k in "abcd"]
    levels = [lv for _, lv in reports if lv is not None]
    if levels:
        mr["umbilicity_deficit"] = _max(lv["umbilicity_deficit"] for lv in levels)
        mr["normal_ricci_mix"] = _max(lv["normal_ricci_mix"] for lv in levels)
        if soliton and mr.get("d_norm") is not None and mr["d_norm"] < SOLITON_GATE:
            verdicts["level_sets_umbilic"] = mr["umbilicity_deficit"] <= 10 * SOLITON_GATE
            verdicts["gradient_is_ricci_eigenvector"] = mr["normal_ricci_mix"] <= 10 * SOLITON_GATE
    return mr, verdicts


def cmd_verify(args):
    s, desc, profile = _resolve(args)
    pts = _points(args, s)
    rows, reports = _verify_points(s, pts)
    mr, verdicts = _summarize(s, reports, profile is not None and profile.kind != "analytic")
    extra = {}
    fib = s.chart.fibration
    if fib is not None and fib.profile is not None:
        lo, hi = s.chart.domain.sampling_bounds(s.chart.margin)
        level = float(np.sqrt(lo[0] * hi[0])) if lo[0] > 0 else 0.5 * (lo[0] + hi[0])
        try:
            scan = constancy_scan(s, level, samples=max(args.samples, 2), seed=args.seed)
        except CriticalPointError:
            scan = None
        extra["constancy_scan"] = scan
    settings = {"samples": len(pts), "seed": args.seed, "derivative_mode": s.chart.derivative_mode,
                "soliton_gate": SOLITON_GATE}
    doc = _document(args, desc, settings, rows, mr, verdicts, extra)
    _write(dumps(doc), args.out)
    return EXIT_OK if all(verdicts.values()) else EXIT_FAIL


def cmd_bryant(args):
    cfg = BryantConfig(n=args.n, normalization=args.normalization, r_max=args.rmax, r_seed=args.rseed,
                       series_order=args.series_order, rtol=args.rtol, atol=args.atol, grid_points=args.grid_points)
    profile = integrate(cfg)
    report = asymptotics(profile)
    energy = profile.meta["step_energy"]
    c0 = args.normalization
    spread = float(np.max(np.abs(energy - c0)))
    settings = {k: v for k, v in profile.meta["config"].items()}
    mr = {"energy_deviation": spread, "ode_residual": float(max(np.max(e) for e in profile.ode_residual()))}
    verdicts = {
        "energy_conserved": spread < 1e-7 * c0,
        "phi_increasing": profile.meta["step_min_dphi"] > 0,
        "scalar_nonnegative": bool(np.min(profile.scalar_curvature()) >= 0),
    }
    doc = _document(args, {"bryant": {"n": args.n}}, settings, [], mr, verdicts,
                    {"profile": {"n": profile.n, "lambda": profile.lam, "rows": int(profile.r.size),
                                 "steps": profile.meta["steps"]},
                     "asymptotics": report.as_dict(),
                     "expected_exponents": {"curvature_decay": -1.0, "volume_growth": (args.n + 1) / 2}})
    text = dumps(doc)
    if args.out:
        profile.to_csv(args.out)
        side = Path(args.json) if args.json else sidecar_path(args.out)
        side.write_text(text)
    else:
        _write(text, args.json)
    return EXIT_OK if all(verdicts.values()) else EXIT_FAIL


def _thresholds(args):
    th = Thresholds()
    return Thresholds(
        soliton=args.soliton_gate if args.soliton_gate is not None else th.soliton,
        d_tensor=args.d_gate if args.d_gate is not None else th.d_tensor,
        gradient=args.grad_gate if args.grad_gate is not None else th.gradient,
        shape=args.shape_tol if args.shape_tol is not None else th.shape,
    )


def cmd_classify(args):
    th = _thresholds(args)
    if args.profile:
        profile = load_profile(args.profile, args.n, args.lam)
        rep = classify(profile, th)
        desc = {"profile": str(args.profile), "n": profile.n, "lambda": profile.lam}
    elif args.catalog:
        entry = catalog.make(args.catalog, **_parse_params(args.param))
        if not entry.is_steady:
            raise UsageError(f"catalog entry {args.catalog!r} is not a steady soliton")
        rep = classify(entry.soliton, th, samples=args.samples, seed=args.seed)
        desc = {"catalog": args.catalog, "params": entry.params}
    else:
        raise UsageError("give an input with --catalog NAME or --profile FILE")
    settings = {"samples": args.samples, "seed": args.seed, "thresholds": rep.thresholds_used}
    verdicts = {"branch": rep.branch, "definite": rep.branch in DEFINITE}
    doc = _document(args, desc, settings, [], {k: v for k, v in rep.evidence.items()}, verdicts,
                    {"classification": rep.as_dict()})
    _write(dumps(doc), args.out)
    if rep.branch == "not_a_soliton" or rep.branch not in DEFINITE:
        return EXIT_FAIL
    return EXIT_OK


def cmd_catalog(args):
    if args.action == "list":
        _write("".join(name + "\n" for name in catalog.names()), args.out)
        return EXIT_OK
    if not args.name:
        raise UsageError(f"catalog {args.action} needs an entry name")
    entry = catalog.make(args.name, **_parse_params(args.param))
    if args.action == "show":
        doc = {"name": entry.name, "description": entry.description, "params": entry.params,
               "dimension": entry.chart.dim, "rho": entry.rho, "expected_branch": entry.expected_branch,
               "expected": entry.expected}
        _write(dumps(doc), args.out)
        return EXIT_OK
    results = catalog.sweep(entry, samples=args.samples, seed=args.seed)
    verdicts = {r.name: r.passed for r in results}
    doc = _document(args, {"catalog": args.name, "params": entry.params},
                    {"samples": args.samples, "seed": args.seed}, results,
                    {r.name: r.value for r in results}, verdicts)
    _write(dumps(doc), args.out)
    return EXIT_OK if all(verdicts.values()) else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _add_common(p, inputs=True):
    if inputs:
        p.add_argument("--catalog", help="catalog entry name")
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="catalog parameter (repeatable)")
        p.add_argument("--profile", help="profile CSV")
        p.add_argument("--n", type=int, help="dimension of a profile (otherwise sidecar or inferred)")
        p.add_argument("--lam", type=float, help="fiber Einstein constant of a profile")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--no-meta", action="store_true", help="omit timestamp and version from JSON")


def build_parser():
    parser = argparse.ArgumentParser(prog="solitonkit", description="Curvature and soliton diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensors", help="dump curvature and conformal tensors at points")
    _add_common(p)
    p.add_argument("--point", action="append", help="comma-separated coordinates (repeatable)")
    p.set_defaults(func=cmd_tensors)

    p = sub.add_parser("verify", help="run every soliton and level-set identity")
    _add_common(p)
    p.add_argument("--point", action="append", help="comma-separated coordinates (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bryant", help="integrate the Bryant soliton and fit its asymptotics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--normalization", type=float, default=1.0, help="R at the tip")
    p.add_argument("--rmax", type=float, default=1e3)
    p.add_argument("--rseed", type=float, default=1e-3)
    p.add_argument("--series-order", type=int, default=7)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--grid-points", type=int, default=2000)
    p.add_argument("--out", help="profile CSV path (asymptotics JSON goes next to it)")
    p.add_argument("--json", help="asymptotics JSON path")
    p.add_argument("--no-meta", action="store_true")
    p.set_defaults(func=cmd_bryant)

    p = sub.add_parser("classify", help="classify a steady soliton")
    _add_common(p)
    p.add_argument("--soliton-gate", type=float)
    p.add_argument("--d-gate", type=float)
    p.add_argument("--grad-gate", type=float)
    p.add_argument("--shape-tol", type=float)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("catalog", help="list, show or sweep catalog entries")
    p.add_argument("action", choices=("list", "show", "sweep"))
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    _add_common(p, inputs=False)
    p.set_defaults(func=cmd_catalog)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, GeometryError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
