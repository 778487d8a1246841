from concurrent.futures import ThreadPoolExecutor
import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from invcircle.errors import (
    BracketError,
    NoAttractorError,
    NoBracketError,
    NoCircleError,
    NonConvergenceError,
    PeriodicAttractorError,
)
from invcircle.mapcore import MapParams
from invcircle.rotnum import GOLDEN_MEAN
from invcircle.synthetic import AffineField, ArnoldStaircase, CircularField, arnold_rotation
from invcircle.tracer import (
    RhoEvalConfig,
    TraceConfig,
    _Sampler,
    circle_bracket_search,
    fpm_solve,
    rho_eval,
    trace_contour,
)


def test_fpm_affine_one_iteration():
    r = fpm_solve(lambda t: 2 * t - 1, 0.0, 1.0)
    assert r.t == 0.5 and r.iterations == 1


def test_fpm_sqrt2():
    r = fpm_solve(lambda t: t * t - 2, 1.0, 2.0)
    assert abs(r.t - math.sqrt(2)) < 1e-10


@pytest.mark.parametrize("illinois", [True, False])
def test_fpm_bracket_invariant(illinois):
    r = fpm_solve(lambda t: t ** 3 - 0.2, 0.0, 3.0, illinois=illinois, max_iter=10_000)
    assert r.brackets
    for a, fa, b, fb in r.brackets:
        assert fa * fb <= 0


def test_illinois_beats_plain_on_convex_function():
    f = lambda t: math.exp(5 * t) - 2  # noqa: E731
    a = fpm_solve(f, 0.0, 1.0, illinois=True)
    b = fpm_solve(f, 0.0, 1.0, illinois=False, max_iter=10_000)
    assert a.iterations < b.iterations


def test_fpm_needs_bracket():
    with pytest.raises(BracketError):
        fpm_solve(lambda t: t * t + 1, -1.0, 1.0)


def test_fpm_nonconvergence_carries_best():
    with pytest.raises(NonConvergenceError) as e:
        fpm_solve(lambda t: t ** 3 - 0.2, 0.0, 3.0, max_iter=2)
    assert e.value.best is not None


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_fpm_exact_on_any_affine(root, slope):
    r = fpm_solve(lambda t: slope * (t - root), -6.0, 6.0)
    assert r.iterations <= 1
    assert abs(r.t - root) < 1e-9


def test_arnold_staircase_is_monotone_with_plateaus():
    om = np.linspace(0.4, 0.6, 41)
    rho = [arnold_rotation(w) for w in om]
    assert all(b >= a - 1e-12 for a, b in zip(rho, rho[1:]))
    assert abs(arnold_rotation(0.5) - 0.5) < 1e-9


def test_arnold_staircase_golden_target():
    f = ArnoldStaircase(GOLDEN_MEAN)
    r = fpm_solve(f, 0.55, 0.75, value_tol=1e-9)
    assert abs(r.value) <= 1e-9


@pytest.mark.parametrize("direction, half", [(math.pi / 2, math.pi / 2), (0.0, math.pi)])
def test_bracket_straddles_affine_contour(direction, half):
    s = _Sampler(AffineField(), 0.0)
    br = circle_bracket_search((0.1, 0.0), 0.2, direction, s,
                               TraceConfig(radius=0.2, max_half_angle=half))
    assert br.f1 * br.f2 <= 0
    assert min(br.p1[0], br.p2[0]) <= 0 <= max(br.p1[0], br.p2[0])
    assert abs(abs(br.theta2 - br.theta1) - math.radians(10)) < 1e-12
    for q in (br.p1, br.p2):
        assert abs(math.hypot(q[0] - 0.1, q[1]) - 0.2) < 1e-15


def test_no_bracket_far_from_contour():
    s = _Sampler(AffineField(), 0.0)
    with pytest.raises(NoBracketError):
        circle_bracket_search((1.0, 0.0), 0.2, 0.0, s,
                              TraceConfig(radius=0.2, max_half_angle=math.pi))


def test_bracket_search_stays_in_half_plane():
    s = _Sampler(AffineField(), 0.0)
    with pytest.raises(NoBracketError):
        circle_bracket_search((0.1, 0.0), 0.2, 0.0, s, TraceConfig(radius=0.2))


def _spacing_ok(points, cfg):
    for a, b in zip(points, points[1:]):
        d = math.hypot(b.m1 - a.m1, b.m2 - a.m2)
        assert d <= b.radius_used + cfg.param_tol + 1e-15
        assert d >= cfg.min_radius / 2


def test_affine_trace_is_straight():
    cfg = TraceConfig(target=0.0, initial_direction=math.pi / 2, max_points=60)
    res = trace_contour((-0.1, 0.0), (0.1, 0.0), AffineField(), cfg)
    assert res.stop_reason == "step-budget" and len(res.points) == 60
    assert all(abs(p.m1) <= 1e-10 for p in res.points)
    m2 = [p.m2 for p in res.points]
    assert all(b > a for a, b in zip(m2, m2[1:]))
    _spacing_ok(res.points, cfg)


def test_circular_trace_stays_on_circle():
    cfg = TraceConfig(target=0.5, initial_direction=math.pi / 2, radius=0.01, max_points=200)
    res = trace_contour((0.3, 0.0), (0.7, 0.0), CircularField(), cfg)
    assert all(abs(math.hypot(p.m1, p.m2) - 0.5) < 1e-8 for p in res.points)
    assert all(p.residual <= cfg.accept_tol for p in res.points)
    _spacing_ok(res.points, cfg)


class Fenced:
    """Affine field that fails above M2 = 0.0123."""

    def __call__(self, m1, m2):
        if m2 > 0.0123:
            raise NoCircleError("fence")
        return m1


def test_shrink_out_near_failure_region():
    cfg = TraceConfig(target=0.0, initial_direction=math.pi / 2, min_radius=1e-6)
    res = trace_contour((-0.1, 0.0), (0.1, 0.0), Fenced(), cfg)
    assert res.stop_reason == "shrink-out"
    assert 0.0123 - res.points[-1].m2 < 2e-6
    radii = [p.radius_used for p in res.points]
    first_shrink = next(i for i, r in enumerate(radii) if r < cfg.radius)
    assert all(b <= a for a, b in zip(radii[first_shrink:], radii[first_shrink + 1:]))
    assert res.failures
    _spacing_ok(res.points, cfg)


def test_resume_matches_uninterrupted():
    cfg = TraceConfig(target=0.5, initial_direction=math.pi / 2, radius=0.01, max_points=40)
    full = trace_contour((0.3, 0.0), (0.7, 0.0), CircularField(), cfg)
    part = trace_contour((0.3, 0.0), (0.7, 0.0), CircularField(),
                         TraceConfig(**{**cfg.__dict__, "max_points": 15}))
    rest = trace_contour(None, None, CircularField(), cfg, resume=part.points)
    assert [(p.m1, p.m2) for p in rest.points] == [(p.m1, p.m2) for p in full.points]


def test_concurrent_samples_are_deterministic():
    cfg = TraceConfig(target=0.5, initial_direction=math.pi / 2, radius=0.01, max_points=30)
    a = trace_contour((0.3, 0.0), (0.7, 0.0), CircularField(), cfg)
    with ThreadPoolExecutor(4) as ex:
        b = trace_contour((0.3, 0.0), (0.7, 0.0), CircularField(), cfg, executor=ex, batch=4)
    assert [(p.m1, p.m2, p.rho) for p in a.points] == [(p.m1, p.m2, p.rho) for p in b.points]


def test_seed_must_bracket():
    with pytest.raises(BracketError):
        trace_contour((0.1, 0.0), (0.2, 0.0), AffineField(), TraceConfig(target=0.0))


def test_on_point_callback():
    seen = []
    cfg = TraceConfig(target=0.0, initial_direction=math.pi / 2, max_points=5)
    trace_contour((-0.1, 0.0), (0.1, 0.0), AffineField(), cfg, on_point=seen.append)
    assert len(seen) == 5


def test_invalid_trace_config():
    with pytest.raises(ValueError):
        TraceConfig(shrink=1.5)
    with pytest.raises(ValueError):
        TraceConfig(min_radius=0.0)


# map pipeline

FAST = RhoEvalConfig(n=20_000, n_transient=5_000)


def test_rho_eval_fixed_point_region():
    with pytest.raises(PeriodicAttractorError) as e:
        rho_eval(MapParams(0.5, 0.0, 0.0), FAST)
    assert e.value.period == 1 and isinstance(e.value, NoCircleError)


def test_rho_eval_escape():
    with pytest.raises(NoAttractorError):
        rho_eval(MapParams(0.5, 5.0, 0.0), FAST)


def test_rho_eval_on_circle():
    rho = rho_eval(MapParams(0.5, 0.7, -0.23), RhoEvalConfig())
    assert 0.6 < rho < 0.64


def test_map_contour_prefix():
    from invcircle.tracer import MapField

    cfg = TraceConfig(max_points=3)
    res = trace_contour((0.68, -0.23), (0.71, -0.23), MapField(RhoEvalConfig()), cfg)
    assert len(res.points) == 3
    for p in res.points:
        assert abs(rho_eval(MapParams(0.5, p.m1, p.m2)) - GOLDEN_MEAN) < 1e-9
