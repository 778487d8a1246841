"""Constant-rotation-number contours in the (M1, M2) plane.

A seed segment crossing the contour is solved with false position; the
contour is then followed by sampling a small circle around the last point,
bracketing the target between two adjacent samples and solving again on
the chord.  When a step fails the circle radius is shrunk, which lets the
trace creep up to the point where the invariant circle breaks down.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Callable

import numpy as np

from .errors import (
    BracketError,
    InvCircleError,
    NoAttractorError,
    NoBracketError,
    NonConvergenceError,
    PeriodicAttractorError,
    ProjectionDegenerateError,
    UnconvergedRotationError,
)
from .mapcore import ESCAPE_NORM, MapParams, fixed_points
from .orbit import Orbit, default_seeds, iterate_orbit
from .rotnum import GOLDEN_MEAN, RotationConfig, RotationResult, rotation_number
from .tangent import AnalysisConfig, LyapunovResult, analyze
from .wba import weighted_average

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# rotation number as a function of parameters

@dataclass(frozen=True)
class RhoEvalConfig:
    B: float = 0.5
    n: int = 100_000
    n_transient: int = 10_000
    L: int = 3
    conv_tol: float = 1e-10
    p_max: int = 100
    per_eps: float = 1e-6
    per_window: int = 200
    fixed_point_offset: float = 1e-2
    escape_norm: float = ESCAPE_NORM


def candidate_seeds(p: MapParams, cfg: RhoEvalConfig) -> np.ndarray:
    """Points just off each fixed point, then the default lattice."""
    near = [s + np.array([cfg.fixed_point_offset, 0.0, 0.0]) for s in fixed_points(p)]
    seeds = default_seeds()
    if near:
        seeds = np.vstack([np.array(near[::-1]), seeds])
    return seeds


def _recurrence_period(points: np.ndarray, p_max: int, eps: float, window: int) -> int:
    tail = points[-(window + p_max):]
    head = tail[:window]
    for q in range(1, p_max + 1):
        d = tail[q: q + window] - head
        if np.all(np.einsum("ij,ij->i", d, d) < eps * eps):
            return q
    return 0


@dataclass
class CircleFit:
    orbit: Orbit
    rotation: RotationResult

    @property
    def rho(self) -> float:
        return self.rotation.rho


def find_circle(p: MapParams, cfg: RhoEvalConfig = RhoEvalConfig(), n_points: int | None = None) -> CircleFit:
    """Locate an attracting invariant circle at ``p`` and measure its rotation.

    Raises :class:`NoAttractorError` if every seed escapes,
    :class:`PeriodicAttractorError` (with the rational rotation number when
    it can be measured) on periodic attractors, and
    :class:`UnconvergedRotationError` when the weighted averages over the
    full and half orbit disagree by more than ``cfg.conv_tol``.
    """
    n_keep = max(cfg.n, n_points or 0) + cfg.L
    orbit = None
    for seed in candidate_seeds(p, cfg):
        o = iterate_orbit(p, seed, cfg.n_transient, n_keep, cfg.escape_norm)
        if not o.escaped:
            orbit = o
            break
    if orbit is None:
        raise NoAttractorError(f"all seeds escape at M1={p.M1!r}, M2={p.M2!r}")
    period = _recurrence_period(orbit.points, cfg.p_max, cfg.per_eps, cfg.per_window)
    if period:
        rho = None
        if period > 2:
            try:
                r = rotation_number(orbit.points[: cfg.n + cfg.L], RotationConfig(cfg.L))
                rho = round(r.rho * period) / period % 1.0
            except InvCircleError:
                pass
        raise PeriodicAttractorError(period, rho)
    rot = rotation_number(orbit.points[: cfg.n + cfg.L], RotationConfig(cfg.L))
    if rot.delta_spread >= 1.0:
        raise ProjectionDegenerateError(
            f"lifted angle increments spread over {rot.delta_spread:.3g} turns")
    half = weighted_average(rot.deltas.unwrapped[: rot.deltas.unwrapped.shape[0] // 2])
    if abs(half - rot.lifted_average) > cfg.conv_tol:
        raise UnconvergedRotationError(
            f"rotation average not converged: |full - half| = {abs(half - rot.lifted_average):.3g}")
    return CircleFit(orbit, rot)


def rho_eval(p: MapParams, cfg: RhoEvalConfig = RhoEvalConfig()) -> float:
    return find_circle(p, cfg).rho


class MapField:
    """Rotation number of the map family as a function of (M1, M2)."""

    def __init__(self, cfg: RhoEvalConfig = RhoEvalConfig()):
        self.cfg = cfg

    def __call__(self, m1: float, m2: float) -> float:
        return rho_eval(MapParams(self.cfg.B, float(m1), float(m2)), self.cfg)


# ---------------------------------------------------------------------------
# false position

@dataclass
class FPMResult:
    t: float
    value: float
    iterations: int
    brackets: list = field(default_factory=list)   # (a, fa, b, fb) per iteration


def fpm_solve(f: Callable[[float], float], a: float, b: float, *,
              value_tol: float = 1e-10, param_tol: float = 1e-14, max_iter: int = 100,
              illinois: bool = True, fa: float | None = None, fb: float | None = None) -> FPMResult:
    """Root of ``f`` on ``[a, b]`` by false position.

    The bracket ``f(a) f(b) <= 0`` is kept at every step.  With ``illinois``
    the value at an endpoint retained twice in a row is halved, which
    avoids the one-sided stall of plain false position.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if not fa * fb <= 0:
        raise BracketError(f"f({a!r})={fa!r} and f({b!r})={fb!r} do not bracket a root")
    if abs(fa) <= value_tol:
        return FPMResult(a, fa, 0)
    if abs(fb) <= value_tol:
        return FPMResult(b, fb, 0)
    brackets = []
    side = 0
    best = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    ga, gb = fa, fb   # possibly down-weighted endpoint values
    for it in range(1, max_iter + 1):
        brackets.append((a, fa, b, fb))
        c = (a * gb - b * ga) / (gb - ga)
        if not (min(a, b) <= c <= max(a, b)):
            c = 0.5 * (a + b)
        fc = f(c)
        if abs(fc) < abs(best[1]):
            best = (c, fc)
        if abs(fc) <= value_tol:
            return FPMResult(c, fc, it, brackets)
        if fa * fc <= 0:
            b, fb, gb = c, fc, fc
            if side == -1 and illinois:
                ga *= 0.5
            side = -1
        else:
            a, fa, ga = c, fc, fc
            if side == 1 and illinois:
                gb *= 0.5
            side = 1
        if abs(b - a) <= param_tol:
            return FPMResult(best[0], best[1], it, brackets)
    raise NonConvergenceError(f"false position did not converge in {max_iter} iterations",
                              best=best)


# ---------------------------------------------------------------------------
# continuation

@dataclass(frozen=True)
class TraceConfig:
    target: float = GOLDEN_MEAN
    radius: float = 1e-3
    angle_step: float = math.radians(10.0)
    shrink: float = 0.5
    min_radius: float = 1e-6
    accept_tol: float = 1e-9
    value_tol: float = 1e-10
    param_tol: float = 1e-14
    max_iter: int = 100
    illinois: bool = True
    initial_direction: float = math.radians(20.0)
    max_half_angle: float = math.radians(90.0)
    max_points: int = 10_000

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not self.min_radius > 0 or self.radius < self.min_radius:
            raise ValueError("need 0 < min_radius <= radius")
        if self.accept_tol <= 0 or self.value_tol <= 0 or self.angle_step <= 0:
            raise ValueError("tolerances and angle step must be positive")


@dataclass
class ContourPoint:
    m1: float
    m2: float
    rho: float
    residual: float
    radius_used: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def point(self) -> np.ndarray:
        return np.array([self.m1, self.m2])


@dataclass
class TraceResult:
    points: list
    stop_reason: str         # "shrink-out" or "step-budget"
    failures: list = field(default_factory=list)   # (m1, m2, radius, message)


class _Sampler:
    """Evaluates ``target``-shifted field values, mapping failures to None."""

    def __init__(self, field_fn, target, executor=None):
        self.field = field_fn
        self.target = target
        self.executor = executor
        self.failures = []

    def value(self, pt):
        try:
            return self.field(float(pt[0]), float(pt[1])) - self.target
        except PeriodicAttractorError as e:
            if e.rho is None:
                self.failures.append((float(pt[0]), float(pt[1]), str(e)))
                return None
            # tongue plateau: keep the rational value for bracketing
            return e.rho - self.target
        except InvCircleError as e:
            self.failures.append((float(pt[0]), float(pt[1]), str(e)))
            return None

    def values(self, pts):
        if self.executor is None or len(pts) < 2:
            return [self.value(p) for p in pts]
        futures = [self.executor.submit(_eval_point, self.field, self.target, tuple(p)) for p in pts]
        out = []
        for fut in futures:
            v, fail = fut.result()
            if fail is not None:
                self.failures.append(fail)
            out.append(v)
        return out

    def strict(self, pt):
        """Value for the root finder; failures propagate."""
        try:
            return self.field(float(pt[0]), float(pt[1])) - self.target
        except PeriodicAttractorError as e:
            if e.rho is None:
                raise
            return e.rho - self.target


def _eval_point(field_fn, target, pt):
    s = _Sampler(field_fn, target)
    v = s.value(pt)
    return v, (s.failures[0] if s.failures else None)


@dataclass
class Bracket:
    theta1: float
    theta2: float
    p1: np.ndarray
    p2: np.ndarray
    f1: float
    f2: float


def _on_circle(center, radius, theta):
    return np.array([center[0] + radius * math.cos(theta), center[1] + radius * math.sin(theta)])


def circle_bracket_search(center, radius: float, direction: float, sampler: _Sampler,
                          cfg: TraceConfig, batch: int = 1) -> Bracket:
    """Two adjacent samples on the circle whose values enclose the target.

    Samples sit at ``direction + (j + 1/2) * angle_step``; the pair
    ``j = -1, 0`` straddles the predicted direction.  Stepping proceeds
    towards the side the two initial values point to, then the other side,
    never beyond ``max_half_angle`` from the predicted direction.
    """
    if radius < cfg.min_radius:
        raise ValueError("radius below the configured minimum")
    h = cfg.angle_step
    jmax = int(math.floor(cfg.max_half_angle / h - 0.5))
    cache = {}

    def theta(j):
        return direction + (j + 0.5) * h

    def get(js):
        todo = [j for j in js if j not in cache]
        if todo:
            vals = sampler.values([_on_circle(center, radius, theta(j)) for j in todo])
            cache.update(zip(todo, vals))
        return [cache[j] for j in js]

    def pair(j):
        f1, f2 = cache.get(j), cache.get(j + 1)
        if f1 is None or f2 is None or not f1 * f2 <= 0:
            return None
        return Bracket(theta(j), theta(j + 1), _on_circle(center, radius, theta(j)),
                       _on_circle(center, radius, theta(j + 1)), f1, f2)

    f_lo, f_hi = get([-1, 0])
    hit = pair(-1)
    if hit:
        return hit
    # +1 when increasing theta should move the value towards the target
    sgn = +1
    if f_lo is not None and f_hi is not None:
        ref = f_lo if abs(f_lo) > abs(f_hi) else f_hi
        slope = f_hi - f_lo
        sgn = +1 if (slope * ref) < 0 else -1
    elif f_hi is None:
        sgn = -1
    for d in (sgn, -sgn):
        # new sample j closes the pair (j - 1, j) going up, (j, j + 1) going down
        js = list(range(1, jmax + 1)) if d > 0 else list(range(-2, -jmax - 2, -1))
        for start in range(0, len(js), batch):
            chunk = js[start: start + batch]
            get(chunk)
            for j in chunk:
                hit = pair(j - 1) if d > 0 else pair(j)
                if hit:
                    return hit
    raise NoBracketError(f"no bracket on circle of radius {radius:.3g} around "
                         f"({center[0]:.10g}, {center[1]:.10g})")


def _solve_chord(sampler: _Sampler, p1, p2, f1, f2, cfg: TraceConfig):
    length = float(np.hypot(*(p2 - p1)))

    def along(t):
        return sampler.strict(p1 + t * (p2 - p1))

    res = fpm_solve(along, 0.0, 1.0, value_tol=cfg.value_tol,
                    param_tol=cfg.param_tol / max(length, 1e-300), max_iter=cfg.max_iter,
                    illinois=cfg.illinois, fa=f1, fb=f2)
    return p1 + res.t * (p2 - p1), res.value


def trace_contour(seed_a, seed_b, field_fn: Callable[[float, float], float],
                  cfg: TraceConfig = TraceConfig(), *, resume: list | None = None,
                  on_point: Callable[[ContourPoint], None] | None = None,
                  executor=None, batch: int = 1) -> TraceResult:
    """Follow the contour ``field_fn = cfg.target`` from a crossing segment.

    ``resume`` continues from previously accepted points (the state after a
    point is its position, the direction from its predecessor and the radius
    it was found with), so an interrupted run picks up exactly where it
    stopped.  ``on_point`` is called for every newly accepted point.
    """
    sampler = _Sampler(field_fn, cfg.target, executor)
    failures = []
    points = list(resume or [])

    def accept(pt, value, radius):
        cp = ContourPoint(float(pt[0]), float(pt[1]), value + cfg.target, abs(value), radius)
        points.append(cp)
        if on_point:
            on_point(cp)
        return cp

    if not points:
        a = np.asarray(seed_a, dtype=float)
        b = np.asarray(seed_b, dtype=float)
        fa = sampler.value(a)
        fb = sampler.value(b)
        if fa is None or fb is None or not fa * fb <= 0:
            raise BracketError(f"seed segment does not bracket the target "
                               f"(values {fa}, {fb} relative to {cfg.target})")
        p0, v0 = _solve_chord(sampler, a, b, fa, fb, cfg)
        if abs(v0) > cfg.accept_tol:
            raise NonConvergenceError(f"seed solve residual {abs(v0):.3g} above tolerance",
                                      best=(p0, v0))
        accept(p0, v0, cfg.radius)

    radius = points[-1].radius_used
    while len(points) < cfg.max_points:
        here = points[-1].point
        if len(points) >= 2:
            d = here - points[-2].point
            direction = math.atan2(d[1], d[0])
        else:
            direction = cfg.initial_direction
        try:
            br = circle_bracket_search(here, radius, direction, sampler, cfg, batch)
            pt, val = _solve_chord(sampler, br.p1, br.p2, br.f1, br.f2, cfg)
            if abs(val) > cfg.accept_tol:
                raise NonConvergenceError(f"residual {abs(val):.3g} above accept tolerance")
        except InvCircleError as e:
            failures.append((float(here[0]), float(here[1]), radius, str(e)))
            log.info("step failed at radius %.3g: %s", radius, e)
            radius *= cfg.shrink
            if radius < cfg.min_radius:
                return TraceResult(points, "shrink-out", failures)
            continue
        accept(pt, val, radius)
    return TraceResult(points, "step-budget", failures)


# ---------------------------------------------------------------------------
# per-point diagnostics

def analyze_point(m1: float, m2: float, rho_cfg: RhoEvalConfig,
                  analysis_cfg: AnalysisConfig) -> tuple[CircleFit, LyapunovResult]:
    """Attractor and exponent/bundle analysis at one parameter point."""
    p = MapParams(rho_cfg.B, float(m1), float(m2))
    fit = find_circle(p, rho_cfg, n_points=analysis_cfg.n_total)
    return fit, analyze(p, fit.orbit.points[: analysis_cfg.n_total], analysis_cfg)


def point_diagnostics(lyap: LyapunovResult) -> dict:
    ang = lyap.min_angles
    return {
        "lambda": tuple(float(x) for x in lyap.exponents),
        "angles": (ang[(0, 1)], ang[(0, 2)], ang[(1, 2)]),
        "reducible": bool(lyap.reducible),
    }


def analyze_contour(points: list, rho_cfg: RhoEvalConfig, analysis_cfg: AnalysisConfig) -> list:
    """Attach exponents, minimal angles and reducibility to each point.

    Failures are stored under ``diagnostics["error"]`` and do not stop the
    sweep.  Points are modified in place and also returned.
    """
    for cp in points:
        try:
            _, lyap = analyze_point(cp.m1, cp.m2, rho_cfg, analysis_cfg)
            cp.diagnostics.update(point_diagnostics(lyap))
        except (InvCircleError, ValueError) as e:
            cp.diagnostics["error"] = str(e)
    return points
