"""Synthetic data with known answers: circles with prescribed inner rotation,
analytic parameter fields, and the Arnold circle-map staircase."""

import math

import numpy as np

from .wba import weighted_average


def rigid_rotation(rho: float, n: int, radius: float = 1.0, center=(0.0, 0.0, 0.0),
                   theta0: float = 0.0) -> np.ndarray:
    """Points on a horizontal circle advanced by ``rho`` turns per step."""
    th = 2 * np.pi * (theta0 + np.arange(n) * rho)
    c = np.asarray(center, dtype=float)
    return np.column_stack([c[0] + radius * np.cos(th), c[1] + radius * np.sin(th),
                            np.full(n, c[2])])


def analytic_circle(theta) -> np.ndarray:
    """A non-planar real-analytic embedded circle, star-shaped about its mean
    when projected on its principal plane."""
    s = 2 * np.pi * np.asarray(theta, dtype=float)
    x = (2 + 0.3 * np.cos(2 * s)) * np.cos(s) + 0.4
    y = (1.5 + 0.2 * np.sin(3 * s)) * np.sin(s) - 0.3
    z = 0.4 * np.sin(2 * s) + 0.2 * np.cos(s) + 0.1 * np.sin(s + 0.5)
    return np.column_stack([x, y, z])


def analytic_circle_orbit(rho: float, n: int, theta0: float = 0.1) -> np.ndarray:
    return analytic_circle(theta0 + np.arange(n) * rho)


class AffineField:
    """``r(M1, M2) = M1``: contours are vertical lines."""

    def __call__(self, m1: float, m2: float) -> float:
        return float(m1)


class CircularField:
    """``r(M1, M2) = |(M1, M2) - center|``: contours are circles."""

    def __init__(self, center=(0.0, 0.0)):
        self.center = (float(center[0]), float(center[1]))

    def __call__(self, m1: float, m2: float) -> float:
        return math.hypot(m1 - self.center[0], m2 - self.center[1])


def arnold_rotation(omega: float, k: float = 0.9, n: int = 4096, transient: int = 512) -> float:
    """Rotation number of ``x -> x + omega - k/(2 pi) sin(2 pi x)``.

    Uses the weighted average of lift increments, which is monotone
    non-decreasing in ``omega`` and locks to rationals on tongues.
    """
    x = 0.0
    tp = 2 * math.pi
    for _ in range(transient):
        x = x + omega - k / tp * math.sin(tp * x)
    steps = np.empty(n - 1)
    for i in range(n - 1):
        xn = x + omega - k / tp * math.sin(tp * x)
        steps[i] = xn - x
        x = xn
    return weighted_average(steps)


class ArnoldStaircase:
    """``omega -> rho(omega) - target`` as a function on [0, 1]."""

    def __init__(self, target: float, k: float = 0.9, n: int = 4096):
        self.target, self.k, self.n = target, k, n

    def __call__(self, omega: float) -> float:
        return arnold_rotation(omega, self.k, self.n) - self.target
