"""Exception types raised by the numerical routines."""


class DomainError(ValueError):
    """An argument lies outside the domain where a routine is defined or certified."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap without meeting its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ThresholdOverflowError(OverflowError):
    """A threshold search ran past 2**62."""
