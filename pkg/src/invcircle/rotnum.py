"""Rotation numbers of invariant circles from orbit samples.

The orbit is projected to a plane, angle increments around a centre point
are lifted to a continuous function of the circle coordinate using nearest
neighbours in a delay embedding, and the weighted Birkhoff average of the
lifted increments gives the rotation number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from ._jit import JIT_ENABLED
from .errors import (
    AmbiguousUnwrapError,
    DegenerateInputError,
    ProjectionDegenerateError,
    UndefinedAngleError,
)
from .export import write_csv
from .wba import weighted_average

GOLDEN_MEAN = (5 ** 0.5 - 1) / 2
# plane normals are oriented to have a positive component along this axis,
# which fixes the sign convention of the measured rotation number
ORIENTATION_AXIS = np.ones(3) / 3 ** 0.5


@dataclass
class PlanarOrbit:
    points: np.ndarray                 # complex
    center: complex = 0j
    origin: np.ndarray | None = None   # 3D point mapped to 0
    basis: np.ndarray | None = None    # rows e1, e2

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)

    @property
    def min_distance(self) -> float:
        return float(np.min(np.abs(self.points - self.center)))

    def transformed(self, points) -> "PlanarOrbit":
        return PlanarOrbit(points, self.center, self.origin, self.basis)


@dataclass
class DelayEmbedding:
    L: int
    points: np.ndarray   # (N - L + 1, 2L) real


@dataclass
class UnwrappedDeltas:
    raw: np.ndarray
    unwrapped: np.ndarray
    offsets: np.ndarray
    neighbor: np.ndarray
    neighbor_distance: np.ndarray

    @property
    def spread(self) -> float:
        return float(np.ptp(self.unwrapped)) if self.unwrapped.size else 0.0


@dataclass(frozen=True)
class RotationConfig:
    L: int = 3
    n: int | None = None      # use at most this many orbit points

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("delay count L must be >= 2")


@dataclass
class RotationResult:
    rho: float
    winding_assumed: int = 1
    n_used: int = 0
    max_neighbor_distance: float = 0.0
    delta_spread: float = 0.0
    min_center_distance: float = 0.0
    lifted_average: float = 0.0
    deltas: UnwrappedDeltas | None = field(default=None, repr=False)

    def diagnostics(self) -> dict:
        return {
            "max_neighbor_distance": self.max_neighbor_distance,
            "delta_spread": self.delta_spread,
            "min_center_distance": self.min_center_distance,
            "lifted_average": self.lifted_average,
        }


def _orbit_points(orbit) -> np.ndarray:
    pts = getattr(orbit, "points", orbit)
    return np.asarray(pts, dtype=float).reshape(-1, 3)


def project_orbit(orbit) -> PlanarOrbit:
    """Project onto the plane of the two leading principal directions.

    Coordinates are centred on the orbit mean and the centre ``P`` is that
    mean.  Basis signs are fixed so the plane normal points along
    (1, 1, 1) and the first axis has a positive dominant component.
    """
    pts = _orbit_points(orbit)
    if pts.shape[0] < 10:
        raise DegenerateInputError("need at least 10 orbit points to project")
    origin = pts.mean(axis=0)
    X = pts - origin
    evals, evecs = np.linalg.eigh(X.T @ X / X.shape[0])
    scale = max(evals[2], np.finfo(float).tiny)
    if evals[2] <= 1e-28 or evals[1] <= 1e-12 * scale:
        raise ProjectionDegenerateError(
            f"orbit covariance is degenerate (eigenvalues {evals[::-1]})")
    e1 = evecs[:, 2]
    if e1[np.argmax(np.abs(e1))] < 0:
        e1 = -e1
    e2 = evecs[:, 1]
    normal = np.cross(e1, e2)
    if normal @ ORIENTATION_AXIS < 0 or (normal @ ORIENTATION_AXIS == 0
                                         and normal[np.argmax(np.abs(normal))] < 0):
        e2 = -e2
    z = X @ e1 + 1j * (X @ e2)
    return PlanarOrbit(z, 0j, origin, np.vstack([e1, e2]))


def raw_deltas(po: PlanarOrbit) -> np.ndarray:
    """Angle increments around ``po.center`` in turns, reduced to [0, 1)."""
    rel = po.points - po.center
    zero = np.flatnonzero(rel == 0)
    if zero.size:
        raise UndefinedAngleError(f"orbit point {zero[0]} coincides with the centre")
    d = np.angle(rel[1:] / rel[:-1]) / (2 * np.pi)
    d = np.mod(d, 1.0)
    d[d >= 1.0] = 0.0
    return d


def delay_embed(po: PlanarOrbit, L: int) -> DelayEmbedding:
    z = po.points
    n = z.shape[0] - L + 1
    if L < 2:
        raise ValueError("L must be >= 2")
    if z.shape[0] <= L:
        raise DegenerateInputError(f"sequence of length {z.shape[0]} too short for L={L}")
    cols = []
    for j in range(L):
        cols.append(z[j: j + n].real)
        cols.append(z[j: j + n].imag)
    return DelayEmbedding(L, np.column_stack(cols))


def nearest_prior(X: np.ndarray, brute_below: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """For each row ``k >= 1`` the index ``m < k`` minimising ``|X_k - X_m|``.

    Returns ``(index, distance)``; row 0 gets index 0 and distance 0.
    """
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if JIT_ENABLED:
        if X.shape[1] < 2:
            # the grid hashes two coordinates; a zero column leaves distances unchanged
            X = np.column_stack([X, np.zeros(X.shape[0])])
        return kernels.nearest_prior_grid(X, brute_below)
    return nearest_prior_kdtree(X, brute_below)


def nearest_prior_kdtree(X: np.ndarray, brute_below: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """k-d tree variant of :func:`nearest_prior`.

    Small prefixes are brute-forced; later rows query a tree over all rows
    with a growing neighbour count until a prior index shows up, falling
    back to brute force for the rare stragglers.
    """
    X = np.ascontiguousarray(X, dtype=float)
    n = X.shape[0]
    nb = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n)

    def brute(k):
        d2 = np.sum((X[:k] - X[k]) ** 2, axis=1)
        m = int(np.argmin(d2))
        nb[k] = m
        dist[k] = np.sqrt(d2[m])

    for k in range(1, min(n, brute_below)):
        brute(k)
    pending = np.arange(min(n, brute_below), n)
    if pending.size:
        tree = cKDTree(X)
        kk = 16
        while pending.size and kk < n:
            d, idx = tree.query(X[pending], k=min(kk, n))
            prior = idx < pending[:, None]
            found = prior.any(axis=1)
            first = np.argmax(prior, axis=1)
            rows = np.flatnonzero(found)
            nb[pending[rows]] = idx[rows, first[rows]]
            dist[pending[rows]] = d[rows, first[rows]]
            pending = pending[~found]
            kk *= 8
        for k in pending:
            brute(int(k))
    return nb, dist


def unwrap_deltas(raw, embedding: DelayEmbedding) -> UnwrappedDeltas:
    """Lift raw increments so neighbouring circle points get close values.

    Index 0 keeps offset 0; every later increment is shifted by the integer
    that brings it within 1/2 of its nearest prior neighbour's lifted value.
    """
    raw = np.asarray(raw, dtype=float)
    n = embedding.points.shape[0]
    if raw.shape[0] < n:
        raise DegenerateInputError("embedding does not cover the increments")
    raw = np.ascontiguousarray(raw[:n])
    nb, dist = nearest_prior(embedding.points)
    offsets, bad = kernels.unwrap_chain(raw, nb)
    if bad >= 0:
        raise AmbiguousUnwrapError(int(bad))
    return UnwrappedDeltas(raw, raw + offsets, offsets, nb, dist)


def rotation_number_planar(po: PlanarOrbit, cfg: RotationConfig = RotationConfig()) -> RotationResult:
    if cfg.n is not None:
        po = po.transformed(po.points[: cfg.n])
    raw = raw_deltas(po)
    emb = delay_embed(po, cfg.L)
    ud = unwrap_deltas(raw, emb)
    avg = weighted_average(ud.unwrapped)
    rho = float(avg - np.floor(avg))
    if rho >= 1.0:
        rho = 0.0
    return RotationResult(
        rho=rho,
        n_used=int(po.points.shape[0]),
        max_neighbor_distance=float(ud.neighbor_distance[1:].max()) if ud.raw.size > 1 else 0.0,
        delta_spread=ud.spread,
        min_center_distance=po.min_distance,
        lifted_average=float(avg),
        deltas=ud,
    )


def rotation_number(orbit, cfg: RotationConfig = RotationConfig()) -> RotationResult:
    """Rotation number in [0, 1) of the circle sampled by ``orbit``.

    Assumes the projected curve winds once around the centroid; a lifted
    increment spread of 1 or more indicates that assumption failed.
    """
    pts = _orbit_points(orbit)
    if cfg.n is not None:
        pts = pts[: cfg.n]
    return rotation_number_planar(project_orbit(pts), RotationConfig(cfg.L))


@dataclass
class ConjugacySamples:
    theta: np.ndarray
    points: np.ndarray

    def write_csv(self, path, digest: str | None = None):
        rows = ([th, *p] for th, p in zip(self.theta, self.points))
        return write_csv(path, ["theta", "x", "y", "z"], rows, digest)


def build_conjugacy(orbit, rho: float) -> ConjugacySamples:
    """Samples ``(frac(k rho), x_k)`` sorted by circle coordinate."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    pts = _orbit_points(orbit)
    theta = np.mod(np.arange(pts.shape[0]) * rho, 1.0)
    order = np.argsort(theta, kind="stable")
    return ConjugacySamples(theta[order], pts[order])
