"""Exception hierarchy.

Structural errors are caller mistakes (shapes, ranges). Numerical errors are
raised when an algorithm hits a degenerate configuration; the CLI maps those
to exit status 3.
"""


class GatepathError(Exception):
    """Base class for all package errors."""


class StructuralError(GatepathError, ValueError):
    """Inconsistent dimensions, indices or malformed inputs."""


class ConfigError(GatepathError, ValueError):
    """Invalid run configuration or input file."""


class NumericalError(GatepathError, ArithmeticError):
    """Base class for degenerate numerical situations."""


class SingularityError(NumericalError):
    """Pseudoinverse requested for a zero vector."""


class DegenerateFitError(NumericalError):
    """Regression fit produced an unusable coefficient vector."""


class DegenerateTrainingSetError(NumericalError):
    """Centered kernel matrix has no eigenvalue above the cutoff."""


class ProjectionZeroError(NumericalError):
    """Projection of the anchor point onto the retained components vanishes."""


class DenominatorCollapseError(NumericalError):
    """Fixed-point denominator fell below the positivity threshold."""

    def __init__(self, denominator: float):
        super().__init__(f"fixed-point denominator collapsed to {denominator:.3e}")
        self.denominator = denominator


class DecodeError(GatepathError, ValueError):
    """Pathway element could not be mapped back onto canonical edges."""
