"""Exception types shared across the library.

The CLI maps these onto exit codes: configuration/usage problems exit with
code 2, numerical non-convergence with code 3, failed validation checks
with code 1.
"""


class UsageError(ValueError):
    """An operation was called with an unsupported combination of arguments."""


class ConfigError(ValueError):
    """A configuration file is malformed or violates a model invariant."""


class DegenerateSupportError(ValueError):
    """A truncated density has essentially no probability mass left.

    Raised when a Marcum-Q normalizer underflows (serving distance in the
    extreme tail), instead of silently returning zero densities.
    """


class NumericalError(RuntimeError):
    """Numerical evaluation failed to converge.

    The best available estimate, when one exists, is carried in ``value``.
    """

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value
