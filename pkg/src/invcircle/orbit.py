"""Forward iteration, periodicity classification and period-map grid scans."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import itertools

import numpy as np

from . import kernels
from ._jit import JIT_ENABLED
from .mapcore import ESCAPE_NORM, MapParams, as_state


@dataclass
class Orbit:
    params: MapParams
    points: np.ndarray
    n_transient: int
    seed: np.ndarray
    escaped_at: int | None = None

    @property
    def escaped(self) -> bool:
        return self.escaped_at is not None

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class PeriodClass:
    """Recurrence class of an attractor.

    ``kind`` is one of ``"fixed"``, ``"periodic"``, ``"aperiodic"``,
    ``"escaped"``; ``period`` is set for the first two.
    """

    kind: str
    period: int = 0

    @classmethod
    def from_period(cls, p: int) -> "PeriodClass":
        if p == 1:
            return cls("fixed", 1)
        return cls("periodic", p)

    @classmethod
    def from_kernel(cls, code: int) -> "PeriodClass":
        if code == -1:
            return ESCAPED
        if code == 0:
            return APERIODIC
        return cls.from_period(int(code))

    @property
    def code(self) -> int:
        """CSV code: 0 escaped, -1 aperiodic, otherwise the period."""
        if self.kind == "escaped":
            return 0
        if self.kind == "aperiodic":
            return -1
        return self.period

    def rank(self) -> tuple[int, int]:
        # fixed < periodic(2) < ... < aperiodic < escaped
        order = {"fixed": 0, "periodic": 0, "aperiodic": 1, "escaped": 2}
        return order[self.kind], self.period

    def __str__(self):
        if self.kind in ("fixed", "periodic"):
            return f"{self.kind}({self.period})"
        return self.kind


ESCAPED = PeriodClass("escaped")
APERIODIC = PeriodClass("aperiodic")


@dataclass(frozen=True)
class ClassifyConfig:
    n_transient: int = 10_000
    n_keep: int = 10_000
    eps: float = 1e-6
    p_max: int = 100
    window: int = 200
    escape_norm: float = ESCAPE_NORM

    def __post_init__(self):
        if self.p_max < 1 or self.window < 1 or self.eps <= 0:
            raise ValueError("p_max, window must be >= 1 and eps > 0")
        if self.n_keep < self.window + self.p_max:
            raise ValueError("n_keep must be at least window + p_max")


def default_seeds(extent: float = 1.5, per_axis: int = 3) -> np.ndarray:
    axis = np.linspace(-extent, extent, per_axis)
    return np.array(list(itertools.product(axis, axis, axis)), dtype=float)


def iterate_orbit(p: MapParams, seed, n_transient: int, n_keep: int,
                  escape_norm: float = ESCAPE_NORM) -> Orbit:
    """Discard ``n_transient`` iterates and keep the next ``n_keep``.

    Escape is reported through ``Orbit.escaped_at``; the kept points are
    then truncated to those computed before the escape.
    """
    if n_transient < 0 or n_keep < 1:
        raise ValueError("n_transient must be >= 0 and n_keep >= 1")
    seed = as_state(seed)
    pts, escaped_at = kernels.iterate(p.B, p.M1, p.M2, seed, int(n_transient),
                                      int(n_keep), float(escape_norm))
    if escaped_at >= 0:
        kept = max(0, escaped_at - n_transient)
        return Orbit(p, pts[:kept].copy(), n_transient, seed, int(escaped_at))
    return Orbit(p, pts, n_transient, seed)


def _classify_numpy(p: MapParams, seeds: np.ndarray, cfg: ClassifyConfig) -> np.ndarray:
    """Vectorised over seeds; same contract as :func:`kernels.classify_seed`."""
    x, y, z = (seeds[:, i].copy() for i in range(3))
    m = seeds.shape[0]
    esc2 = cfg.escape_norm ** 2
    alive = x * x + y * y + z * z <= esc2
    total = cfg.n_transient + cfg.n_keep
    tail = cfg.window + cfg.p_max
    buf = np.empty((tail, 3, m))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(total):
            j = i - (total - tail)
            if j >= 0:
                buf[j, 0], buf[j, 1], buf[j, 2] = x, y, z
            x, y, z = y, z, p.B * x + p.M1 + p.M2 * y - z * z
            if i + 1 < total:
                alive &= x * x + y * y + z * z <= esc2
                # park escaped seeds so they cannot overflow further
                x = np.where(alive, x, 0.0)
                y = np.where(alive, y, 0.0)
                z = np.where(alive, z, 0.0)
    codes = np.zeros(m, dtype=np.int64)
    codes[~alive] = -1
    undecided = alive.copy()
    head = buf[: cfg.window]
    for per in range(1, cfg.p_max + 1):
        if not undecided.any():
            break
        d = buf[per: per + cfg.window] - head
        ok = np.all(np.sum(d * d, axis=1) < cfg.eps ** 2, axis=0) & undecided
        codes[ok] = per
        undecided &= ~ok
    return codes


def _classify_codes(p: MapParams, seeds: np.ndarray, cfg: ClassifyConfig) -> np.ndarray:
    seeds = np.ascontiguousarray(seeds, dtype=float).reshape(-1, 3)
    if not JIT_ENABLED:
        return _classify_numpy(p, seeds, cfg)
    return np.array([
        kernels.classify_seed(p.B, p.M1, p.M2, s, cfg.n_transient, cfg.n_keep,
                              cfg.window, cfg.p_max, cfg.eps, cfg.escape_norm)
        for s in seeds
    ], dtype=np.int64)


def classify_attractor(p: MapParams, seed, cfg: ClassifyConfig = ClassifyConfig()) -> PeriodClass:
    """Minimal recurrence period of the attractor reached from ``seed``.

    Period ``q`` is accepted when every point in the final test window
    returns within ``cfg.eps`` after ``q`` steps.
    """
    code = _classify_codes(p, as_state(seed)[None, :], cfg)[0]
    return PeriodClass.from_kernel(int(code))


@dataclass
class ScanRequest:
    B: float
    m1_range: tuple[float, float]
    m2_range: tuple[float, float]
    resolution: tuple[int, int]
    seeds: np.ndarray = field(default_factory=default_seeds)
    cfg: ClassifyConfig = field(default_factory=ClassifyConfig)

    def __post_init__(self):
        if min(self.resolution) < 1:
            raise ValueError("resolution must be >= 1 on both axes")
        self.seeds = np.asarray(self.seeds, dtype=float).reshape(-1, 3)
        if self.seeds.shape[0] < 1:
            raise ValueError("at least one seed is required")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (_axis(self.m1_range, self.resolution[0]),
                _axis(self.m2_range, self.resolution[1]))


def _axis(bounds, n):
    lo, hi = bounds
    if n == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, n)


@dataclass
class GridScan:
    """Per-cell min/max classes; arrays indexed ``[i_m2, i_m1]``."""

    B: float
    m1: np.ndarray
    m2: np.ndarray
    min_code: np.ndarray
    max_code: np.ndarray

    def records(self):
        for j, m2 in enumerate(self.m2):
            for i, m1 in enumerate(self.m1):
                yield float(m1), float(m2), int(self.min_code[j, i]), int(self.max_code[j, i])


def _scan_row(args):
    B, m1_axis, m2, seeds, cfg = args
    lo = np.empty(len(m1_axis), dtype=np.int64)
    hi = np.empty(len(m1_axis), dtype=np.int64)
    for i, m1 in enumerate(m1_axis):
        classes = [PeriodClass.from_kernel(int(c))
                   for c in _classify_codes(MapParams(B, float(m1), float(m2)), seeds, cfg)]
        # escaping seeds found no attractor; they only count when all escape
        ranked = sorted((c for c in classes if c != ESCAPED), key=PeriodClass.rank) or [ESCAPED]
        lo[i] = ranked[0].code
        hi[i] = ranked[-1].code
    return lo, hi


def scan_grid(req: ScanRequest, workers: int = 1) -> GridScan:
    """Classify every seed at every grid node.

    Per cell the minimum and maximum class are taken over the seeds that
    stay bounded, ordered fixed < period 2 < ... < aperiodic; a cell is
    escaped only when every seed escapes.

    Rows are independent; with ``workers > 1`` they are farmed out to a
    process pool and reassembled in row order.
    """
    m1_axis, m2_axis = req.axes()
    jobs = [(req.B, m1_axis, float(m2), req.seeds, req.cfg) for m2 in m2_axis]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_scan_row, jobs))
    else:
        rows = [_scan_row(j) for j in jobs]
    return GridScan(
        req.B, m1_axis, m2_axis,
        np.array([r[0] for r in rows]).reshape(len(m2_axis), len(m1_axis)),
        np.array([r[1] for r in rows]).reshape(len(m2_axis), len(m1_axis)),
    )
