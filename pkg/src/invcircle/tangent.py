"""Invariant bundles and Lyapunov exponents along an attracting circle.

A forward Gram-Schmidt pair converges to the tangent direction and the
tangent-plus-slow plane, a backward pair to the fast direction and the
slow-plus-fast plane.  The slow bundle is the intersection of the two
planes.  Exponents are weighted Birkhoff averages of the one-step log
growth along each section.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateCocycleError, IntersectionDegenerateError
from .export import write_csv
from .mapcore import MapParams
from .wba import weighted_average

PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class AnalysisConfig:
    n_warmup: int = 1_000
    n_window: int = 100_000
    n_cooldown: int = 1_000
    coincidence_tol: float = 1e-3
    jitter: float = 1e-3
    seed: int = 0

    @property
    def n_total(self) -> int:
        return self.n_warmup + self.n_window + self.n_cooldown

    @property
    def window(self) -> tuple[int, int]:
        return self.n_warmup, self.n_warmup + self.n_window


@dataclass
class FrameSeries:
    U: np.ndarray
    V: np.ndarray
    Ut: np.ndarray | None = None
    Vt: np.ndarray | None = None


@dataclass
class BundleSeries:
    h0: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    conditioning: np.ndarray
    window: tuple[int, int]

    def section(self, i: int) -> np.ndarray:
        return (self.h0, self.h1, self.h2)[i]


@dataclass
class AngleSeries:
    series: dict
    minima: dict


@dataclass
class LyapunovResult:
    exponents: tuple[float, float, float]
    reducible: bool
    tol: float
    bundles: BundleSeries | None = field(default=None, repr=False)
    angles: AngleSeries | None = field(default=None, repr=False)

    @property
    def min_angles(self) -> dict:
        """Per-pair minima with the slow/fast angle zeroed when not reducible."""
        out = dict(self.angles.minima)
        if not self.reducible:
            out[(1, 2)] = 0.0
        return out


def initial_frames(seed: int = 0, jitter: float = 1e-3):
    """Canonical start vectors with a reproducible small perturbation.

    Returns ``(u, v, u_back, v_back)``.
    """
    rng = np.random.default_rng(seed)
    base = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0, 1.0, 0]])
    return tuple(base + jitter * rng.standard_normal(base.shape))


def _points(orbit):
    return np.ascontiguousarray(getattr(orbit, "points", orbit), dtype=float)


def forward_frames(p: MapParams, orbit, u_init, v_init) -> FrameSeries:
    U, V, status = kernels.forward_frames(p.B, p.M2, _points(orbit),
                                          np.asarray(u_init, float), np.asarray(v_init, float))
    if status != kernels.OK:
        raise DegenerateCocycleError("tangent vector image vanished in forward propagation")
    return FrameSeries(U, V)


def backward_frames(p: MapParams, orbit, u_init, v_init) -> FrameSeries:
    """Frames propagated by the inverse derivative from the last orbit point."""
    U, V, status = kernels.backward_frames(p.B, p.M2, _points(orbit),
                                           np.asarray(u_init, float), np.asarray(v_init, float))
    if status != kernels.OK:
        raise DegenerateCocycleError("tangent vector image vanished in backward propagation")
    return FrameSeries(U, V)


def _align_signs(h: np.ndarray) -> np.ndarray:
    h = h.copy()
    if h[0, np.argmax(np.abs(h[0]))] < 0:
        h[0] = -h[0]
    if h.shape[0] > 1:
        flips = np.cumprod(np.where(np.sum(h[1:] * h[:-1], axis=1) < 0, -1.0, 1.0))
        h[1:] *= flips[:, None]
    return h


def _unit(v):
    return v / np.linalg.norm(v, axis=1)[:, None]


def bundles(frames: FrameSeries, window: tuple[int, int], tol: float = 1e-12) -> BundleSeries:
    """Tangent, slow and fast directions on ``range(*window)``."""
    a, b = window
    U, V, Ut, Vt = (x[a:b] for x in (frames.U, frames.V, frames.Ut, frames.Vt))
    h1 = np.cross(np.cross(U, V), np.cross(Ut, Vt))
    cond = np.linalg.norm(h1, axis=1)
    low = np.flatnonzero(~(cond >= tol))
    if low.size:
        raise IntersectionDegenerateError(int(a + low[0]))
    return BundleSeries(_align_signs(_unit(U)), _align_signs(h1 / cond[:, None]),
                        _align_signs(_unit(Ut)), cond, (a, b))


def lyapunov_exponent(p: MapParams, orbit, section: np.ndarray, window=None) -> float:
    """Weighted average of ``log |DF(x_k) h_k|`` over the section's window."""
    pts = _points(orbit)
    if window is not None:
        pts = pts[window[0]: window[1]]
    if pts.shape[0] != section.shape[0]:
        raise ValueError("section and orbit window differ in length")
    logs = kernels.log_growth(p.B, p.M2, np.ascontiguousarray(pts), np.ascontiguousarray(section))
    return weighted_average(logs)


def min_angles(b: BundleSeries) -> AngleSeries:
    """Unsigned angles in [0, pi/2] between each pair of bundles."""
    hs = (b.h0, b.h1, b.h2)
    series = {}
    for i, j in PAIRS:
        c = np.clip(np.abs(np.sum(hs[i] * hs[j], axis=1)), 0.0, 1.0)
        series[(i, j)] = np.arccos(c)
    return AngleSeries(series, {k: float(v.min()) for k, v in series.items()})


def reducibility_check(l1: float, l2: float, tol: float = 1e-3) -> tuple[bool, int]:
    """Whether the two contracting exponents are distinct (strictly by > tol).

    Returns the flag and the number of distinct bundles.
    """
    reducible = (l1 - l2) > tol
    return reducible, 3 if reducible else 2


def analyze(p: MapParams, orbit, cfg: AnalysisConfig = AnalysisConfig()) -> LyapunovResult:
    """Bundles, exponents and angles for an orbit of length ``cfg.n_total``."""
    pts = _points(orbit)
    if pts.shape[0] < cfg.n_total:
        raise ValueError(f"orbit has {pts.shape[0]} points, need {cfg.n_total}")
    pts = pts[: cfg.n_total]
    u, v, ub, vb = initial_frames(cfg.seed, cfg.jitter)
    fwd = forward_frames(p, pts, u, v)
    bwd = backward_frames(p, pts, ub, vb)
    frames = FrameSeries(fwd.U, fwd.V, bwd.U, bwd.V)
    b = bundles(frames, cfg.window)
    lam = [lyapunov_exponent(p, pts, b.section(i), cfg.window) for i in range(3)]
    reducible, _ = reducibility_check(lam[1], lam[2], cfg.coincidence_tol)
    return LyapunovResult(tuple(lam), reducible, cfg.coincidence_tol, b, min_angles(b))


def qr_exponents(p: MapParams, orbit, window: tuple[int, int], seed: int = 0) -> np.ndarray:
    """Repeated-QR exponent estimate, kept independent of the frame kernels.

    The orthonormal frame is pushed by the Jacobian and re-orthonormalised
    with Householder QR at every step; ``log R_ii`` is averaged with the
    bump weight over ``window``.  Returned in decreasing order.
    """
    pts = _points(orbit)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(np.eye(3) + 1e-3 * rng.standard_normal((3, 3)))
    logs = np.empty((window[1] - window[0], 3))
    J = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [p.B, p.M2, 0.0]])
    for k in range(window[1]):
        J[2, 2] = -2.0 * pts[k, 2]
        Q, R = np.linalg.qr(J @ Q)
        d = np.sign(np.diag(R))
        Q = Q * d
        if k >= window[0]:
            logs[k - window[0]] = np.log(np.abs(np.diag(R)))
    return np.sort([weighted_average(logs[:, i]) for i in range(3)])[::-1]


def write_bundle_csv(path, b: BundleSeries, angles: AngleSeries, reducible: bool = True,
                     digest: str | None = None):
    """One row per window index: the three unit sections and pairwise angles.

    The slow/fast angle column is zero when the normal bundle does not split.
    """
    a0 = b.window[0]
    ang12 = angles.series[(1, 2)] if reducible else np.zeros(len(b.h0))
    rows = (
        [a0 + i, *b.h0[i], *b.h1[i], *b.h2[i],
         angles.series[(0, 1)][i], angles.series[(0, 2)][i], ang12[i]]
        for i in range(len(b.h0))
    )
    return write_csv(path, ["k", "h0x", "h0y", "h0z", "h1x", "h1y", "h1z", "h2x", "h2y", "h2z",
                            "ang01", "ang02", "ang12"], rows, digest)
