"""Attracting invariant circles of a 3D Henon-like family: rotation numbers
by weighted Birkhoff averages, constant-rotation contours in parameter space
and Lyapunov/bundle diagnostics of their breakdown."""

__version__ = "0.1.0"

from .errors import InvCircleError  # noqa: E402
from .mapcore import MapParams, apply, apply_inverse, fixed_point_multipliers, fixed_points, jacobian  # noqa: E402
from .rotnum import GOLDEN_MEAN, rotation_number  # noqa: E402
from .wba import weighted_average  # noqa: E402

__all__ = [
    "GOLDEN_MEAN", "InvCircleError", "MapParams", "apply", "apply_inverse",
    "fixed_point_multipliers", "fixed_points", "jacobian", "rotation_number",
    "weighted_average",
]
