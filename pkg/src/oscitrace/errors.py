"""Exception hierarchy shared by every module of the package."""


class OscitraceError(Exception):
    """Base class for all package errors."""


class DomainError(OscitraceError, ValueError):
    """Argument outside the mathematical domain (pole, negative argument...)."""


class ArgumentError(OscitraceError, ValueError):
    """Malformed argument: wrong shape, dimension mismatch, invalid option."""


class UnsupportedRegimeError(OscitraceError, ValueError):
    """The (k, n) regime or exponent is outside what the formulas cover."""


class PreconditionError(OscitraceError, ValueError):
    """A documented precondition (e.g. the real-principal-type check) fails."""


class UnsupportedDimensionError(OscitraceError, ValueError):
    """Half-dimension n outside the supported set {1, 2}."""


class DegenerateChartError(OscitraceError, ValueError):
    """Both the symbol and all its angular derivatives vanish at a direction."""


class ConvergenceError(OscitraceError, RuntimeError):
    """Tolerance not reached within the evaluation budget.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BudgetError(OscitraceError, RuntimeError):
    """A cost guard refused a computation that would be too expensive."""


class FitError(OscitraceError, ValueError):
    """Asymptotic fit impossible: too few samples or a degenerate design."""


class ChartError(OscitraceError, RuntimeError):
    """Shooting for a generating function diverged (caustic / chart breakdown)."""


class ExtrapolationError(OscitraceError, RuntimeError):
    """Richardson extrapolation hit its noise floor before the requested accuracy."""


class ConfigError(OscitraceError, ValueError):
    """Invalid run configuration; ``key_path`` names the offending entry."""

    def __init__(self, message, key_path=""):
        super().__init__(f"{key_path}: {message}" if key_path else message)
        self.key_path = key_path


class DivergentPairingError(OscitraceError, ValueError):
    """Pairing against |t|^(s-1) with s <= 0: the weight is not locally integrable."""


class UnsupportedTermError(OscitraceError, ValueError):
    """Expansion term whose distributional coefficient needs an unspecified regularisation."""
