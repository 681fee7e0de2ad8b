"""Exception types shared across the package.

Plain precondition violations (bad order, bad dimensions, bad domains)
raise ``ValueError`` with a descriptive message; the classes below cover
the failures that callers need to catch and handle distinctly.
"""


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be symmetric positive definite is not.

    Typically signals a negative penalty weight or an unidentifiable
    missing-data pattern.
    """


class UnidentifiableTrendError(ValueError):
    """The observed time points cannot pin down the trend's polynomial part."""


class NonStationaryError(ValueError):
    """An autoregressive model has a root on or inside the unit circle."""


class SymmetryError(ValueError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to converge within its sweep budget."""


class DegenerateInputError(ValueError):
    """Input data carries no usable variation (e.g. constant residuals)."""
