"""Exception hierarchy shared by all modules."""


class UnderactError(Exception):
    """Base class for every error raised by the toolkit."""


class ShapeError(UnderactError, ValueError):
    """Operand dimensions are incompatible."""


class InsufficientDataError(UnderactError, ValueError):
    """Too few samples for the requested estimate."""


class IntegrationDivergedError(UnderactError, ArithmeticError):
    """A non-finite value appeared while integrating."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"integration diverged at t={self.t:.6g} s")


class SingularInertiaError(UnderactError, ArithmeticError):
    """An inertia block (or reduced block) could not be inverted."""

    def __init__(self, q, message=None):
        self.q = q
        super().__init__(message or f"singular inertia block at q={q!r}")


class ControllerSingularityError(UnderactError, ArithmeticError):
    """The control input gain M_s is (numerically) singular."""

    def __init__(self, q, message=None):
        self.q = q
        super().__init__(message or f"controller input gain singular at q={q!r}")


class TrainingDataError(UnderactError, ValueError):
    """Training data produced a non-finite design matrix or target."""


class ConfigError(UnderactError, ValueError):
    """Invalid scenario configuration.

    ``line`` is the 1-based line in the source file when it is known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        self.bare = message
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line else f"{path}: "
        elif line:
            loc = f"line {line}: "
        super().__init__(loc + message)


class SimulationAborted(UnderactError):
    """A run stopped early; ``trace`` holds everything recorded so far."""

    def __init__(self, cause, trace):
        self.cause = cause
        self.trace = trace
        super().__init__(f"simulation aborted: {cause}")
