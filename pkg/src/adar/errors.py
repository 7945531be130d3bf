"""Exception hierarchy."""


class ADARError(Exception):
    """Base class for model and numerical errors."""


class ParameterError(ADARError, ValueError):
    """Invalid parameter, law or configuration value."""


class ExplosionError(ADARError):
    """Simulation produced a non-finite or exploding value."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class DomainError(ADARError):
    """Conditional variance term is not positive."""

    def __init__(self, msg, t=None):
        super().__init__(msg)
        self.t = t


class MatrixError(ADARError, ValueError):
    """Matrix is not symmetric / positive (semi)definite / invertible."""


class FitError(ADARError):
    """Optimizer failure that makes a statistic meaningless."""


class ConfigurationError(ADARError, ValueError):
    """Degenerate configuration, e.g. a zero truncation constant."""
