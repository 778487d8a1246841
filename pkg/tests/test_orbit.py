import numpy as np
import pytest

from invcircle.mapcore import MapParams, apply
from invcircle.orbit import (
    APERIODIC,
    ESCAPED,
    ClassifyConfig,
    PeriodClass,
    ScanRequest,
    classify_attractor,
    default_seeds,
    iterate_orbit,
    scan_grid,
)

FAST = ClassifyConfig(n_transient=3000, n_keep=1000)
ORIGIN = MapParams(0.5, 0.0, 0.0)


def test_iterates_converge_to_origin():
    o = iterate_orbit(ORIGIN, (0.1, 0.1, 0.1), 200, 50)
    assert not o.escaped
    assert np.abs(o.points).max() < 1e-8


def test_huge_seed_escapes():
    o = iterate_orbit(ORIGIN, (1e7, 0, 0), 0, 10)
    assert o.escaped and o.escaped_at == 0 and len(o.points) == 0


def test_orbit_consistency():
    p = MapParams(0.5, 0.7, -0.23)
    o = iterate_orbit(p, (0.1, 0, 0), 1000, 2000)
    rng = np.random.default_rng(1)
    for k in rng.integers(0, len(o.points) - 1, 50):
        assert np.linalg.norm(o.points[k + 1] - apply(p, o.points[k])) < 1e-12


def test_transient_count():
    p = MapParams(0.5, 0.7, -0.23)
    a = iterate_orbit(p, (0.1, 0, 0), 10, 5)
    b = iterate_orbit(p, (0.1, 0, 0), 0, 15)
    assert np.array_equal(a.points, b.points[10:])


def test_fixed_point_class():
    assert classify_attractor(ORIGIN, (0.1, 0.1, 0.1), FAST) == PeriodClass.from_period(1)


def test_escaped_class():
    assert classify_attractor(ORIGIN, (50.0, 50.0, 50.0), FAST) == ESCAPED


def test_quasiperiodic_is_aperiodic():
    assert classify_attractor(MapParams(0.5, 0.7, -0.23), (0.1, 0, 0), FAST) == APERIODIC


def _find_period_two():
    # past the flip of the fixed point (a multiplier crosses -1)
    for m1 in np.linspace(0.3, 0.6, 31):
        p = MapParams(0.5, float(m1), 0.4)
        c = classify_attractor(p, (0.1, 0.1, 0.1), FAST)
        if c == PeriodClass.from_period(2):
            return p
    return None


def test_period_two_minimality():
    p = _find_period_two()
    assert p is not None
    o = iterate_orbit(p, (0.1, 0.1, 0.1), FAST.n_transient, FAST.n_keep)
    pts = o.points[-200:]
    assert np.abs(pts[2:] - pts[:-2]).max() < 1e-6
    assert np.abs(pts[1:] - pts[:-1]).max() > 1e-6


def test_class_codes_and_order():
    assert PeriodClass.from_period(1).code == 1
    assert PeriodClass.from_period(7).code == 7
    assert APERIODIC.code == -1 and ESCAPED.code == 0
    order = [PeriodClass.from_period(1), PeriodClass.from_period(2), PeriodClass.from_period(9),
             APERIODIC, ESCAPED]
    assert sorted(reversed(order), key=PeriodClass.rank) == order


def test_degenerate_grid_matches_single_classification():
    seed = np.array([[0.1, 0.1, 0.1]])
    g = scan_grid(ScanRequest(0.5, (0.0, 0.0), (0.0, 0.0), (1, 1), seed, FAST))
    c = classify_attractor(ORIGIN, seed[0], FAST)
    assert g.min_code[0, 0] == g.max_code[0, 0] == c.code


def test_all_escaping_cell():
    seeds = np.array([[50.0, 50, 50], [-60.0, 0, 0]])
    g = scan_grid(ScanRequest(0.5, (0, 0), (0, 0), (1, 1), seeds, FAST))
    assert g.min_code[0, 0] == g.max_code[0, 0] == 0


def test_origin_cell_with_default_lattice():
    g = scan_grid(ScanRequest(0.5, (0, 0), (0, 0), (1, 1), default_seeds(), FAST))
    assert g.min_code[0, 0] == g.max_code[0, 0] == 1


def test_min_not_above_max_and_worker_determinism():
    req = ScanRequest(0.5, (0.6, 0.9), (-0.3, 0.4), (4, 3), default_seeds(1.0, 2), FAST)
    a = scan_grid(req, workers=1)
    b = scan_grid(req, workers=3)
    assert np.array_equal(a.min_code, b.min_code) and np.array_equal(a.max_code, b.max_code)
    special = {0: ESCAPED, -1: APERIODIC}
    for _, _, lo, hi in a.records():
        clo = special.get(lo) or PeriodClass.from_period(lo)
        chi = special.get(hi) or PeriodClass.from_period(hi)
        assert clo.rank() <= chi.rank()


def test_bad_resolution():
    with pytest.raises(ValueError):
        ScanRequest(0.5, (0, 1), (0, 1), (0, 3))
