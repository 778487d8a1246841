"""Weighted Birkhoff averages with the smooth bump exp(-1/(t(1-t))).

For a smooth observable along a quasiperiodic orbit with Diophantine
rotation the weighted average converges faster than any power of ``n``,
compared with ``O(1/n)`` for the plain time average.
"""

import math
from typing import Callable, Iterable

import numpy as np

from . import kernels
from ._jit import JIT_ENABLED
from .errors import DegenerateInputError


def weight(t):
    """Bump weight supported on (0, 1); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (ti * (1.0 - ti)))
    return out[()] if out.ndim == 0 else out


def _weighted_average_numpy(values, n):
    w = weight(np.arange(1, n) / n)
    total = math.fsum(w)
    if total == 0.0:
        return 0.0, 0.0
    return math.fsum(w * values) / total, total


def weighted_average(values, n: int | None = None) -> float:
    """Weighted Birkhoff average of ``values[k-1] = Delta_k``, ``k = 1..n-1``.

    ``n`` defaults to ``len(values) + 1``.  Raises
    :class:`DegenerateInputError` when every weight underflows (``n < 3``).
    """
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if n is None:
        n = values.shape[0] + 1
    elif values.shape[0] != n - 1:
        raise ValueError(f"expected {n - 1} values for n={n}, got {values.shape[0]}")
    if n < 3:
        raise DegenerateInputError(f"n={n}: all bump weights vanish")
    if JIT_ENABLED:
        avg, total = kernels.weighted_sum(values, n)
    else:
        avg, total = _weighted_average_numpy(values, n)
    if total == 0.0:
        raise DegenerateInputError(f"n={n}: all bump weights vanish")
    return float(avg)


def convergence_probe(
    generator: Callable[[np.ndarray], np.ndarray],
    n_list: Iterable[int],
    limit: float,
) -> list[tuple[int, float]]:
    """Errors ``|WB_n - limit|`` for each ``n``.

    ``generator(k)`` maps an integer index array to the series values there.
    """
    out = []
    for n in n_list:
        k = np.arange(1, n)
        out.append((int(n), abs(weighted_average(generator(k), n) - limit)))
    return out
