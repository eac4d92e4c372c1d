"""Exception hierarchy shared by the library and the CLI."""


class BiphotonError(Exception):
    """Base class for all errors raised by :mod:`biphoton`."""


class DomainError(BiphotonError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(BiphotonError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class FitError(BiphotonError):
    """A fit problem is degenerate or ill-posed."""
