"""Compiled kernels versus the pure numpy/python path.

Each path runs in its own interpreter (the switch is read at import time):

    python benchmarks/bench_kernels.py            # both paths, comparison table
    python benchmarks/bench_kernels.py --n 50000  # longer orbits

The compiled timings exclude compilation: every operation is run once
before timing.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def measure(n: int, repeat: int) -> dict:
    import numpy as np

    from invcircle import _jit
    from invcircle.mapcore import MapParams
    from invcircle.orbit import ClassifyConfig, _classify_codes, default_seeds, iterate_orbit
    from invcircle.rotnum import GOLDEN_MEAN, delay_embed, nearest_prior, project_orbit, rotation_number
    from invcircle.tangent import AnalysisConfig, analyze
    from invcircle.wba import weighted_average

    p = MapParams(0.5, 0.7, -0.23)
    pts = iterate_orbit(p, (0.1, 0.0, 0.0), 5000, n + 2000).points
    emb = delay_embed(project_orbit(pts[:n]), 3).points
    vals = np.cos(2 * np.pi * GOLDEN_MEAN * np.arange(1, n))
    seeds = default_seeds(1.0, 2)
    ccfg = ClassifyConfig(n_transient=n // 2, n_keep=n // 2)
    acfg = AnalysisConfig(n_warmup=1000, n_window=n, n_cooldown=1000)

    ops = {
        "iterate": lambda: iterate_orbit(p, (0.1, 0.0, 0.0), 0, n),
        "classify (8 seeds)": lambda: _classify_codes(p, seeds, ccfg),
        "weighted average": lambda: weighted_average(vals),
        "nearest prior": lambda: nearest_prior(emb),
        "rotation number": lambda: rotation_number(pts[:n]),
        "bundles + exponents": lambda: analyze(p, pts, acfg),
    }
    return {"jit": _jit.JIT_ENABLED, "n": n,
            "seconds": {name: _best(fn, repeat) for name, fn in ops.items()}}


def run_mode(disable: bool, n: int, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("INVCIRCLE_DISABLE_JIT", None)
    if disable:
        env["INVCIRCLE_DISABLE_JIT"] = "1"
    out = subprocess.run([sys.executable, __file__, "--worker", "--n", str(n), "--repeat", str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=20_000, help="orbit length per operation")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print raw timings as JSON")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        print(json.dumps(measure(args.n, args.repeat)))
        return
    fast = run_mode(False, args.n, args.repeat)
    slow = run_mode(True, args.n, args.repeat)
    if args.json:
        print(json.dumps({"jit": fast, "fallback": slow}, indent=2))
        return
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'operation':<22}{'numba [s]':>12}{'fallback [s]':>14}{'speedup':>10}")
    for name, t_fast in fast["seconds"].items():
        t_slow = slow["seconds"][name]
        print(f"{name:<22}{t_fast:>12.4f}{t_slow:>14.4f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
