"""Exception hierarchy shared by every module of the package."""


class FockError(Exception):
    """Base class for all errors raised by :mod:`fockcis`."""


class BracketError(FockError, ValueError):
    """A root-finding bracket does not enclose the target value."""


class QuadratureError(FockError, ArithmeticError):
    """Adaptive quadrature failed to converge.

    The partial (log-scale) value reached before giving up is stored in
    :attr:`partial`.
    """

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class WeightError(FockError, ValueError):
    """Invalid weight definition or a weight evaluated out of its range."""


class HorizonError(FockError, ValueError):
    """A finite sequence or table does not reach far enough."""


class SequenceError(FockError, ValueError):
    """Malformed or degenerate point sequence (duplicates, bad rows)."""


class ConfigError(FockError, ValueError):
    """Invalid run configuration."""


class EvaluationError(FockError, ValueError):
    """A quantity was requested at a point where it is not defined."""


class SpectralError(FockError, ArithmeticError):
    """An eigen-decomposition failed its residual or definiteness check."""
