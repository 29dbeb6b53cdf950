"""Exception hierarchy for the toolkit.

Every error raised on a contract violation derives from TrapLandauError so
callers (in particular the CLI harness) can catch one type and attach
context.
"""


class TrapLandauError(Exception):
    """Base class for all toolkit errors."""


class NonPositiveMass(TrapLandauError):
    """Total mass m must be strictly positive."""


class IndefiniteQuadraticForm(TrapLandauError):
    """Quadratic-form coefficients violate a > 0, c > 0, ac - b^2 > 0."""


class RotationTooLarge(TrapLandauError):
    """Skew part too strong: tr|R| >= 2 sqrt(ac - b^2)."""


class InvalidRotationParameter(TrapLandauError):
    """Rotation number r outside [0, 1)."""


class ZeroMass(TrapLandauError):
    """Moment vector has psi1 <= 0 where positive mass is required."""


class InadmissibleMoments(TrapLandauError):
    """Centered second moments outside the admissible cone."""


class RatioOutOfRange(TrapLandauError):
    """beta/d outside [0, 1), or too close to 1 to solve for nu."""


class TruncationTooSevere(TrapLandauError):
    """Grid box fails to cover the effective support of a distribution."""


class AllNodesBelowFloor(TrapLandauError):
    """No node above the positivity floor; dissipation undefined."""


class GridMismatch(TrapLandauError):
    """Two gridded operands do not share node layout."""


class StabilityBoundViolated(TrapLandauError):
    """Collision sub-stepping would exceed the configured cap."""


class InsufficientDynamicRange(TrapLandauError):
    """Decay-fit input does not span enough decades in t."""


class DegenerateDenominator(TrapLandauError):
    """Inequality-ratio denominator below floor."""


class ParseError(TrapLandauError):
    """Configuration text could not be parsed; carries line context."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(TrapLandauError):
    """Configuration parsed but a field is out of its admissible range."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"field '{field}': {message}"
        super().__init__(message)
        self.field = field
