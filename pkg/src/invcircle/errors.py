"""Exception hierarchy.

Each class carries the process exit code the CLI maps it to.
"""


class InvCircleError(Exception):
    exit_code = 1


class ConfigError(InvCircleError, ValueError):
    exit_code = 2


class SingularMapError(InvCircleError, ValueError):
    """B == 0: the map is not invertible."""


class EscapeError(InvCircleError, ArithmeticError):
    """An iterate left the escape ball or became non-finite."""

    exit_code = 3


class NotFixedPointError(InvCircleError, ValueError):
    pass


class NoComplexPairError(InvCircleError, ValueError):
    pass


class DegenerateInputError(InvCircleError, ValueError):
    pass


class ProjectionDegenerateError(InvCircleError):
    exit_code = 5


class UndefinedAngleError(ProjectionDegenerateError):
    pass


class AmbiguousUnwrapError(ProjectionDegenerateError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"ambiguous half-integer unwrap at index {index}")


class DegenerateCocycleError(InvCircleError, ArithmeticError):
    pass


class IntersectionDegenerateError(InvCircleError, ArithmeticError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"bundle planes are parallel at index {index}")


class NoAttractorError(InvCircleError):
    exit_code = 3


class NoCircleError(InvCircleError):
    """An attractor exists but is not an invariant circle."""

    exit_code = 4


class PeriodicAttractorError(NoCircleError):
    def __init__(self, period, rho=None, message=None):
        self.period = period
        self.rho = rho
        if message is None:
            kind = "fixed point" if period == 1 else f"period-{period} orbit"
            message = f"no invariant circle: attractor is a {kind}"
        super().__init__(message)


class UnconvergedRotationError(NoCircleError):
    """Weighted averages over the orbit disagree: not a smooth circle."""

    exit_code = 7


class BracketError(InvCircleError, ValueError):
    exit_code = 6


class NoBracketError(BracketError):
    pass


class NonConvergenceError(InvCircleError):
    exit_code = 7

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)
