"""Exception types raised across the package."""


class EntwineError(Exception):
    """Base class for all package errors."""


class ShapeError(EntwineError, ValueError):
    """Operands have incompatible shapes or dimensions."""


class HermiticityError(EntwineError, ValueError):
    """A matrix required to be Hermitian is not."""


class NormalizationError(EntwineError, ValueError):
    """A state or operator does not carry the required norm or trace."""


class ValidationError(EntwineError, ValueError):
    """Input violates a documented precondition."""


class DegenerateInputError(EntwineError, ValueError):
    """Input is degenerate (e.g. the zero vector) where that is not allowed."""


class SearchFailure(EntwineError, RuntimeError):
    """A line search or minimization did not reach its target."""
