"""Exception types raised by rarecert."""


class RarecertError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RarecertError, ValueError):
    """An argument lies outside the domain of a function (NaN included)."""


class BracketError(RarecertError, ValueError):
    """A root-finding bracket does not straddle a sign change."""


class ConvergenceError(RarecertError, ArithmeticError):
    """An iterative solver exhausted its budget without meeting tolerance."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        msg = super().__str__()
        if not self.diagnostics:
            return msg
        details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{msg} ({details})"


class AssumptionError(RarecertError, ValueError):
    """The data violate a standing assumption of the method (e.g. p_hat >= 1/2)."""


class PreconditionError(RarecertError, ValueError):
    """A sample-size threshold required by a method is not met.

    ``required`` holds the threshold the input had to exceed.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class UnsupportedRegimeError(RarecertError, ValueError):
    """A sampler was asked for a regime outside its supported budget."""
