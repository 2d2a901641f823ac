"""Exception types shared across the package."""


class WavebarrierError(Exception):
    """Base class for all package-specific failures."""


class DomainError(WavebarrierError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class StagnationError(WavebarrierError, RuntimeError):
    """The vertical gradient degenerated (h_p <= 0 or F_Y <= 0 somewhere).

    Carries the offending column index when known.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InconsistentFieldError(WavebarrierError, RuntimeError):
    """Per-column conserved quantities disagree beyond tolerance.

    Signals that the input field is not a solution of the governing
    equations, rather than a numerical failure of this package.
    """


class ConvergenceError(WavebarrierError, RuntimeError):
    """The Newton iteration failed to converge.

    ``history`` holds one (iteration, residual_norm, step_norm, min_hp)
    tuple per attempted iteration.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = tuple(history)


class SingularJacobianError(ConvergenceError):
    """The Newton matrix was numerically singular (bifurcation point)."""


class SchemaError(WavebarrierError, ValueError):
    """A serialized container is malformed; message names file and field."""
