"""Exception types raised across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat.
"""


class ChtestError(Exception):
    """Base class for all package errors."""


class ConfigError(ChtestError, ValueError):
    """Malformed model, design or file input."""


class HypothesisSpaceTooLarge(ConfigError):
    """C(n, k) exceeds the enumeration cap."""


class ScopeError(ConfigError):
    """Inputs fall outside the regime an operation supports."""


class DegenerateDistributionError(ChtestError, ValueError):
    """A zero-variance (Dirac) law reached a density evaluation."""


class IndistinguishableError(ChtestError, ValueError):
    """Two hypotheses induce identical observation laws (zero exponent)."""


class NumericalError(ChtestError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite output."""
