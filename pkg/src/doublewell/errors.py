"""Exception hierarchy shared by the solver modules."""


class DoubleWellError(Exception):
    """Base class for every error raised by the package."""


class DomainError(DoubleWellError, ValueError):
    """An argument violates a documented precondition."""


class SymmetryError(DoubleWellError, ValueError):
    """A potential breaks the required reflection symmetry."""


class GridMismatchError(DoubleWellError, ValueError):
    pass


class SizeCapError(DoubleWellError, ValueError):
    pass


class ZeroNormError(DoubleWellError, ValueError):
    """A projection annihilated the state."""


class SpanError(DoubleWellError, ValueError):
    """An eigenbasis does not span the state to be expanded."""


class ConvergenceError(DoubleWellError, RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual norm {residual:.3e})")
        self.residual = residual


class StepSizeError(DoubleWellError, RuntimeError):
    """Norm drift of the propagator exceeded tolerance."""


class BracketError(DoubleWellError, RuntimeError):
    pass


class LabelingError(DoubleWellError, RuntimeError):
    """Two-body levels could not be assigned to the a, b, c, d labels."""
