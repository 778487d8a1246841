"""Command-line entry point.

    invcircle scan        --config run.ini --out results --workers 4
    invcircle rotnum      --m1 0.7 --m2 -0.23
    invcircle trace       --config run.ini
    invcircle analyze     --m1 0.7 --m2 -0.23 --out results
    invcircle fixedpoints --b 0.5 --m1 0 --m2 0
    invcircle selftest

Exit codes: 0 success, 1 other library error, 2 configuration error,
3 no attractor, 4 periodic attractor (no circle), 5 degenerate projection,
6 no bracket, 7 non-convergence.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
import json
import logging
import math
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__
from .config import RunConfig, apply_overrides, load_config
from .errors import ConfigError, InvCircleError
from .export import fmt, parse_float, read_csv, write_csv
from .mapcore import MapParams, fixed_point_multipliers, fixed_points, neimark_sacker_phase
from .orbit import ScanRequest, default_seeds, scan_grid
from .rotnum import GOLDEN_MEAN, RotationConfig, build_conjugacy, rotation_number
from .synthetic import AffineField, CircularField, analytic_circle_orbit, rigid_rotation
from .tangent import write_bundle_csv
from .tracer import (
    ContourPoint,
    MapField,
    analyze_point,
    find_circle,
    point_diagnostics,
    trace_contour,
)

log = logging.getLogger("invcircle")

CONTOUR_HEADER = ["index", "M1", "M2", "rho", "residual", "lambda0", "lambda1", "lambda2",
                  "ang01", "ang02", "ang12", "reducible", "radius_used"]

# test-field modes trace analytic contours with their own seed segment and target
TEST_FIELDS = {
    "affine": (AffineField(), 0.0, (-0.1, 0.0), (0.1, 0.0), math.pi / 2),
    "circular": (CircularField((0.0, 0.0)), 0.5, (0.3, 0.0), (0.7, 0.0), math.pi / 2),
}


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(cfg: RunConfig) -> MapParams:
    return MapParams(cfg.B, cfg.m1, cfg.m2)


# ---------------------------------------------------------------------------
# commands

def cmd_scan(cfg: RunConfig, workers: int = 1) -> dict:
    sc = cfg.scan
    req = ScanRequest(cfg.B, (sc.m1_min, sc.m1_max), (sc.m2_min, sc.m2_max), (sc.n_m1, sc.n_m2),
                      default_seeds(sc.seed_extent, sc.seeds_per_axis), cfg.classify_config())
    grid = scan_grid(req, workers)
    out = _outdir(cfg)
    recs = list(grid.records())
    digest = cfg.digest()
    write_csv(out / "scan_min.csv", ["M1", "M2", "class"], ((a, b, lo) for a, b, lo, _ in recs), digest)
    write_csv(out / "scan_max.csv", ["M1", "M2", "class"], ((a, b, hi) for a, b, _, hi in recs), digest)
    return {"cells": len(recs), "files": [str(out / "scan_min.csv"), str(out / "scan_max.csv")]}


def _synthetic_orbit(kind: str, n: int):
    if kind == "golden":
        return analytic_circle_orbit(GOLDEN_MEAN, n), GOLDEN_MEAN
    if kind == "rigid":
        return rigid_rotation(0.25, n, theta0=0.1), 0.25
    if kind == "rational":
        return analytic_circle_orbit(0.4, n), 0.4
    raise ConfigError(f"unknown synthetic orbit {kind!r}")


def cmd_rotnum(cfg: RunConfig, synthetic: str | None = None) -> dict:
    t0 = time.perf_counter()
    r = cfg.rotation
    report = {"B": cfg.B, "M1": cfg.m1, "M2": cfg.m2, "L": r.L}
    if synthetic:
        pts, expected = _synthetic_orbit(synthetic, r.n + r.L)
        rot = rotation_number(pts, RotationConfig(r.L))
        report.update(synthetic=synthetic, expected=expected, error=abs(rot.rho - expected))
    else:
        rot = find_circle(_params(cfg), cfg.rho_config()).rotation
    report.update(rho=rot.rho, winding_assumed=rot.winding_assumed, n_used=rot.n_used,
                  diagnostics=rot.diagnostics(), wall_time_s=time.perf_counter() - t0)
    return report


def _contour_row(index: int, cp: ContourPoint) -> list:
    d = cp.diagnostics
    lam = d.get("lambda", (None,) * 3)
    ang = d.get("angles", (None,) * 3)
    red = d.get("reducible")
    return [index, cp.m1, cp.m2, cp.rho, cp.residual, *lam, *ang,
            None if red is None else int(red), cp.radius_used]


def _load_contour(path: Path, digest: str) -> list[ContourPoint]:
    found, header, rows = read_csv(path)
    if header != CONTOUR_HEADER:
        raise ConfigError(f"{path}: not a contour file (header {header})")
    if found != digest:
        raise ConfigError(f"{path}: written with a different configuration "
                          f"(config-sha256 {found}); remove it or use another --out")
    pts = []
    for row in rows:
        v = dict(zip(header, row))
        cp = ContourPoint(float(v["M1"]), float(v["M2"]), float(v["rho"]),
                          float(v["residual"]), float(v["radius_used"]))
        if v["lambda0"] != "":
            cp.diagnostics = {
                "lambda": tuple(parse_float(v[f"lambda{i}"]) for i in range(3)),
                "angles": tuple(parse_float(v[k]) for k in ("ang01", "ang02", "ang12")),
                "reducible": bool(int(v["reducible"])),
            }
        pts.append(cp)
    return pts


def cmd_trace(cfg: RunConfig, workers: int = 1) -> dict:
    tr = cfg.trace
    tcfg = cfg.trace_config()
    if tr.field == "map":
        field_fn, seed_a, seed_b = MapField(cfg.rho_config()), tr.seed_a, tr.seed_b
    else:
        field_fn, target, seed_a, seed_b, direction = TEST_FIELDS[tr.field]
        tcfg = replace(tcfg, target=target, initial_direction=direction)
    do_analysis = tr.field == "map" and tr.analyze
    rho_cfg, acfg = cfg.rho_config(), cfg.analysis_config()

    path = _outdir(cfg) / "contour.csv"
    digest = cfg.digest()
    resume = _load_contour(path, digest) if path.exists() else []
    if not resume:
        write_csv(path, CONTOUR_HEADER, [], digest)
    counter = [len(resume)]
    n_failed = [0]

    def on_point(cp: ContourPoint):
        if do_analysis:
            try:
                _, lyap = analyze_point(cp.m1, cp.m2, rho_cfg, acfg)
                cp.diagnostics.update(point_diagnostics(lyap))
            except (InvCircleError, ValueError) as e:
                n_failed[0] += 1
                log.warning("analysis failed at (%r, %r): %s", cp.m1, cp.m2, e)
        with open(path, "a", newline="") as fh:
            fh.write(",".join(fmt(v) for v in _contour_row(counter[0], cp)) + "\n")
        counter[0] += 1

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 and tr.field == "map" else None
    try:
        res = trace_contour(seed_a, seed_b, field_fn, tcfg, resume=resume, on_point=on_point,
                            executor=executor, batch=max(1, workers))
    finally:
        if executor is not None:
            executor.shutdown()
    for m1, m2, radius, msg in res.failures:
        log.info("step failure at (%r, %r) radius %.3g: %s", m1, m2, radius, msg)
    return {"points": len(res.points), "new_points": len(res.points) - len(resume),
            "resumed_from": len(resume), "stop_reason": res.stop_reason,
            "step_failures": len(res.failures), "analysis_failures": n_failed[0],
            "final_radius": res.points[-1].radius_used if res.points else None,
            "file": str(path)}


def cmd_analyze(cfg: RunConfig) -> dict:
    p = _params(cfg)
    acfg = cfg.analysis_config()
    fit, lyap = analyze_point(p.M1, p.M2, cfg.rho_config(), acfg)
    out = _outdir(cfg)
    digest = cfg.digest()
    pts = fit.orbit.points[: acfg.n_total]
    write_csv(out / "attractor.csv", ["k", "x", "y", "z"],
              ([k, *pts[k]] for k in range(len(pts))), digest)
    write_bundle_csv(out / "bundles.csv", lyap.bundles, lyap.angles, lyap.reducible, digest)
    conj = build_conjugacy(fit.orbit.points[: fit.rotation.n_used], fit.rho)
    conj.write_csv(out / "conjugacy.csv", digest)
    d = point_diagnostics(lyap)
    summary = {
        "B": p.B, "M1": p.M1, "M2": p.M2, "rho": fit.rho,
        "rotation_diagnostics": fit.rotation.diagnostics(),
        "exponents": list(d["lambda"]), "exponent_sum": float(sum(d["lambda"])),
        "log_abs_B": math.log(abs(p.B)), "reducible": d["reducible"],
        "min_angles": {"01": d["angles"][0], "02": d["angles"][1], "12": d["angles"][2]},
        "window": list(acfg.window),
        "files": [str(out / n) for n in ("attractor.csv", "bundles.csv", "conjugacy.csv")],
    }
    (out / "analyze.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _complex(z):
    return {"re": float(z.real), "im": float(z.imag)}


def cmd_fixedpoints(cfg: RunConfig) -> dict:
    p = _params(cfg)
    entries = []
    for s in fixed_points(p):
        lam = fixed_point_multipliers(p, s)
        mod = np.abs(lam)
        entries.append({
            "t": float(s[0]), "point": [float(c) for c in s],
            "multipliers": [_complex(z) for z in lam],
            "moduli": [float(m) for m in mod],
            "stable": bool(np.all(mod < 1.0)),
        })
    try:
        phase = neimark_sacker_phase(p)
    except InvCircleError:
        phase = None
    return {"B": p.B, "M1": p.M1, "M2": p.M2, "fixed_points": entries,
            "neimark_sacker_phase": phase}


def cmd_selftest() -> tuple[bool, list]:
    """Fast checks that exercise every module on problems with known answers."""
    from .mapcore import apply, apply_inverse, jacobian
    from .tracer import fpm_solve
    from .wba import weighted_average

    results = []

    def check(name, ok, detail):
        results.append({"check": name, "ok": bool(ok), "detail": detail})

    rng = np.random.default_rng(0)
    p = MapParams(0.5, 0.3, -0.2)
    s = rng.uniform(-2, 2, (1000, 3))
    err = max(float(np.linalg.norm(apply_inverse(p, apply(p, x)) - x)) for x in s)
    check("inverse round trip", err < 1e-12, err)
    det = max(abs(float(np.linalg.det(jacobian(p, x))) - 0.5) for x in s[:100])
    check("jacobian determinant", det < 1e-13, det)
    k = np.arange(1, 10_001)
    wb = abs(weighted_average(np.cos(2 * np.pi * k * GOLDEN_MEAN)))
    check("weighted average of a quasiperiodic cosine", wb < 1e-10, wb)
    rho = rotation_number(analytic_circle_orbit(GOLDEN_MEAN, 10_003)).rho
    check("rotation number of a synthetic circle", abs(rho - GOLDEN_MEAN) < 1e-10, rho)
    root = fpm_solve(lambda t: t * t - 2, 1.0, 2.0).t
    check("false position on t^2 - 2", abs(root - math.sqrt(2)) < 1e-10, root)
    fp = fixed_point_multipliers(MapParams(0.5, 0, 0), np.zeros(3))
    check("origin multiplier moduli", np.allclose(np.abs(fp), 0.5 ** (1 / 3), atol=1e-12),
          [float(m) for m in np.abs(fp)])
    return all(r["ok"] for r in results), results


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--workers", type=int, default=1, metavar="N", help="process count (default 1)")
    common.add_argument("--seed", type=int, metavar="U64", help="random seed for frame jitter")
    common.add_argument("--b", type=float, help="map parameter B")
    common.add_argument("--m1", type=float, help="map parameter M1")
    common.add_argument("--m2", type=float, help="map parameter M2")
    common.add_argument("--target-rho", type=float, dest="target_rho", help="contour rotation number")
    common.add_argument("--n", type=int, help="rotation-number orbit length")
    common.add_argument("--L", type=int, dest="L", help="delay-embedding length")
    common.add_argument("-v", "--verbose", action="count", default=0)

    ap = argparse.ArgumentParser(prog="invcircle", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"invcircle {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="period map over a parameter rectangle")
    rn = sub.add_parser("rotnum", parents=[common], help="rotation number at one point")
    rn.add_argument("--synthetic", choices=["golden", "rigid", "rational"],
                    help="use a built-in orbit with known rotation number")
    tr = sub.add_parser("trace", parents=[common], help="trace a constant-rotation contour")
    tr.add_argument("--field", choices=["map", "affine", "circular"],
                    help="parameter field to trace (test fields have analytic contours)")
    tr.add_argument("--max-points", type=int, dest="max_points")
    tr.add_argument("--no-analysis", action="store_true", help="skip per-point exponents")
    sub.add_parser("analyze", parents=[common], help="attractor, bundles and conjugacy at one point")
    sub.add_parser("fixedpoints", parents=[common], help="fixed points and multipliers")
    sub.add_parser("selftest", parents=[common], help="quick built-in correctness checks")
    return ap


def _configure(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfg = apply_overrides(cfg, b=args.b, m1=args.m1, m2=args.m2, seed=args.seed, out=args.out,
                          target_rho=args.target_rho, n=args.n, L=args.L)
    if getattr(args, "field", None):
        cfg.trace.field = args.field
    if getattr(args, "max_points", None) is not None:
        cfg.trace.max_points = args.max_points
    if getattr(args, "no_analysis", False):
        cfg.trace.analyze = False
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
        if args.command == "scan":
            _emit(cmd_scan(cfg, args.workers))
        elif args.command == "rotnum":
            _emit(cmd_rotnum(cfg, args.synthetic))
        elif args.command == "trace":
            _emit(cmd_trace(cfg, args.workers))
        elif args.command == "analyze":
            _emit(cmd_analyze(cfg))
        elif args.command == "fixedpoints":
            _emit(cmd_fixedpoints(cfg))
        elif args.command == "selftest":
            ok, results = cmd_selftest()
            for r in results:
                print(f"{'PASS' if r['ok'] else 'FAIL'}  {r['check']}  ({r['detail']})")
            return 0 if ok else 1
    except InvCircleError as e:
        print(f"invcircle: error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"invcircle: I/O error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
