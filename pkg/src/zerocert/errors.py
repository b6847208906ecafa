"""Exception types raised by the library."""


class ZerocertError(Exception):
    """Base class for library errors."""


class DimensionMismatch(ZerocertError, ValueError):
    pass


class UnsupportedVariant(ZerocertError, ValueError):
    pass


class DomainError(ZerocertError, ValueError):
    """A point lies outside the operator's domain."""


class UndefinedQuotient(ZerocertError, ValueError):
    """A Lipschitz quotient was requested on a region with a single point."""


class NumericalBreakdown(ZerocertError, ArithmeticError):
    """A solver lost accuracy; ``condition`` carries the basis condition number when known."""

    def __init__(self, message, condition=None, diagnostics=None):
        super().__init__(message)
        self.condition = condition
        self.diagnostics = diagnostics or {}


class NonConvergence(ZerocertError, ArithmeticError):
    """An iterative method hit its iteration cap; ``diagnostics`` records the last iterate."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotInterpolable(ZerocertError, ValueError):
    """Finite (points, values, subgradients) data does not extend to a convex function."""


class ContainmentError(ZerocertError, ValueError):
    """A body that must lie inside a region does not."""


class NoCertificate(ZerocertError):
    """A sound negative outcome: the requested certificate cannot be issued."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class InternalInconsistency(ZerocertError, AssertionError):
    """A freshly built certificate failed its own validation."""
