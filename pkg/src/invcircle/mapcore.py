"""The invertible 3D Henon-like family

    F(x, y, z) = (y, z, B x + M1 + M2 y - z^2)

with constant Jacobian determinant B, its inverse, derivative and fixed
points.  States are float64 arrays of shape (3,).
"""

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import (
    EscapeError,
    NoComplexPairError,
    NotFixedPointError,
    SingularMapError,
)

ESCAPE_NORM = 1e6


@dataclass(frozen=True)
class MapParams:
    B: float = 0.5
    M1: float = 0.0
    M2: float = 0.0

    def __post_init__(self):
        for name in ("B", "M1", "M2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.B == 0.0:
            raise SingularMapError("B must be nonzero for the map to be invertible")

    @property
    def dissipative(self) -> bool:
        return abs(self.B) < 1.0

    def with_point(self, M1: float, M2: float) -> "MapParams":
        return MapParams(self.B, float(M1), float(M2))


def as_state(s) -> np.ndarray:
    arr = np.asarray(s, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError("state components must be finite")
    return arr


def _states(s) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"states must have a trailing axis of length 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state components must be finite")
    return arr


def apply(p: MapParams, s) -> np.ndarray:
    """Image of one state, or of a stack of states with shape ``(..., 3)``."""
    arr = _states(s)
    x, y, z = arr[..., 0], arr[..., 1], arr[..., 2]
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.stack([y, z, p.B * x + p.M1 + p.M2 * y - z * z], axis=-1)
    if not np.all(np.isfinite(out)):
        raise EscapeError(f"iterate of {s} overflowed")
    return out


def apply_inverse(p: MapParams, s) -> np.ndarray:
    arr = _states(s)
    x, y, z = arr[..., 0], arr[..., 1], arr[..., 2]
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.stack([(z - p.M1 - p.M2 * x + y * y) / p.B, x, y], axis=-1)
    if not np.all(np.isfinite(out)):
        raise EscapeError(f"preimage of {s} overflowed")
    return out


def jacobian(p: MapParams, s) -> np.ndarray:
    z = as_state(s)[2]
    return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [p.B, p.M2, -2.0 * z]])


def solve_jacobian(p: MapParams, s, v) -> np.ndarray:
    """Solve ``jacobian(p, s) @ w = v`` for ``w`` using the explicit rows."""
    if p.B == 0.0:
        raise SingularMapError("Jacobian is singular for B == 0")
    z = as_state(s)[2]
    v = np.asarray(v, dtype=float).reshape(3)
    return np.array(kernels.solve_jacobian(p.B, p.M2, z, v[0], v[1], v[2]))


def fixed_points(p: MapParams) -> list[np.ndarray]:
    """Real fixed points ``(t, t, t)``, ascending in ``t``.

    ``t`` solves ``t^2 + (1 - B - M2) t - M1 = 0``; a double root is
    returned twice.
    """
    b = 1.0 - p.B - p.M2
    c = -p.M1
    disc = b * b - 4.0 * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    # avoid cancellation in the smaller-magnitude root
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq
    if q == 0.0:
        roots = [0.0, 0.0]
    else:
        roots = sorted([q, c / q + 0.0])
    return [np.full(3, t) for t in roots]


def fixed_point_multipliers(p: MapParams, s, tol: float = 1e-9) -> np.ndarray:
    """Eigenvalues of the Jacobian at a fixed point.

    Roots of ``lam^3 + 2t lam^2 - M2 lam - B``, from the companion matrix.
    Sorted by decreasing modulus.
    """
    s = as_state(s)
    x, y, z = s
    image = np.array(kernels.step(p.B, p.M1, p.M2, x, y, z))
    if np.linalg.norm(image - s) > tol * max(1.0, np.linalg.norm(s)):
        raise NotFixedPointError(f"{s} is not a fixed point (residual {np.linalg.norm(image - s):.3g})")
    t = s[0]
    companion = np.array([[-2.0 * t, p.M2, p.B], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    roots = np.linalg.eigvals(companion).astype(complex)
    order = np.lexsort((-roots.imag, -np.abs(roots)))
    return roots[order]


def neimark_sacker_phase(p: MapParams) -> float:
    """Angle ``phi`` in (0, pi) with ``2 cos(phi) = -(M2 + 1) / B``."""
    arg = -(p.M2 + 1.0) / (2.0 * p.B)
    if not -1.0 < arg < 1.0:
        raise NoComplexPairError(f"cos(phi) = {arg:.6g} is outside (-1, 1)")
    return math.acos(arg)


def neimark_sacker_point(B: float, phi: float) -> MapParams:
    """Parameters on the NS curve where the fixed point has multipliers exp(+-i phi)."""
    c = math.cos(phi)
    M2 = -2.0 * B * c - 1.0
    t = -(c + 0.5 * B)
    M1 = t * t + (1.0 - B - M2) * t
    return MapParams(B, M1, M2)
