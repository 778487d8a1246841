"""The pure-numpy path (INVCIRCLE_DISABLE_JIT=1) must agree with the compiled one."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

PROBE = textwrap.dedent("""
    import json
    import numpy as np
    from invcircle import _jit
    from invcircle.mapcore import MapParams
    from invcircle.orbit import ClassifyConfig, default_seeds, iterate_orbit, _classify_codes
    from invcircle.rotnum import GOLDEN_MEAN, nearest_prior, rotation_number
    from invcircle.synthetic import analytic_circle_orbit
    from invcircle.tangent import AnalysisConfig, analyze
    from invcircle.wba import weighted_average

    p = MapParams(0.5, 0.7, -0.23)
    o = iterate_orbit(p, (0.1, 0.0, 0.0), 2000, 3000)
    cfg = ClassifyConfig(n_transient=1500, n_keep=500)
    codes = _classify_codes(p, default_seeds(1.0, 2), cfg)
    k = np.arange(1, 3000)
    wb = weighted_average(np.cos(2 * np.pi * k * GOLDEN_MEAN))
    rho = rotation_number(analytic_circle_orbit(GOLDEN_MEAN, 3003)).rho
    X = np.random.default_rng(0).standard_normal((1500, 4))
    nb, _ = nearest_prior(X, brute_below=16)
    lam = analyze(p, o.points, AnalysisConfig(n_warmup=200, n_window=2500, n_cooldown=200)).exponents
    print(json.dumps({"jit": _jit.JIT_ENABLED, "last": o.points[-1].tolist(),
                      "codes": codes.tolist(), "wb": wb, "rho": rho, "nb": nb.tolist(),
                      "lam": list(lam)}))
""")


def probe(disable: bool) -> dict:
    env = dict(os.environ)
    env.pop("INVCIRCLE_DISABLE_JIT", None)
    if disable:
        env["INVCIRCLE_DISABLE_JIT"] = "1"
    r = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env,
                       timeout=600)
    assert r.returncode == 0, r.stderr
    return json.loads(r.stdout.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def both():
    return probe(False), probe(True)


def test_flag_switches_path(both):
    jit, ref = both
    assert jit["jit"] is True and ref["jit"] is False


def test_orbit_agrees(both):
    jit, ref = both
    assert np.allclose(jit["last"], ref["last"], rtol=0, atol=1e-9)


def test_classification_agrees(both):
    assert both[0]["codes"] == both[1]["codes"]


def test_averages_agree(both):
    jit, ref = both
    assert abs(jit["wb"] - ref["wb"]) < 1e-15
    assert abs(jit["rho"] - ref["rho"]) < 1e-13


def test_nearest_prior_agrees(both):
    assert both[0]["nb"] == both[1]["nb"]


def test_exponents_agree(both):
    jit, ref = both
    assert np.allclose(jit["lam"], ref["lam"], rtol=0, atol=1e-9)
