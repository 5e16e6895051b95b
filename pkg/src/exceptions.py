"""
Error types raised by the loctrig modules.
"""


class LoctrigError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(LoctrigError, ValueError):
    """An argument violates an operation's preconditions."""


class DegenerateDataError(LoctrigError, ValueError):
    """The data cannot support the requested construction (e.g. zero spread)."""


class UndefinedPointError(LoctrigError, ArithmeticError):
    """A normalized estimate was requested where the density estimate is not positive."""


class QuadratureError(LoctrigError, ArithmeticError):
    """Quadrature refinement did not reach the requested tolerance."""


class ExperimentError(LoctrigError):
    """Unknown experiment name or unusable experiment configuration."""
