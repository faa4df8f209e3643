"""Exception hierarchy shared by every module of the package."""


class QHardyError(Exception):
    """Base class for all package errors."""


class ParameterError(QHardyError, ValueError):
    """A parameter lies outside the window a routine (or theorem) accepts."""


class DomainError(QHardyError, ValueError):
    """An argument is outside the domain where the quantity is defined."""


class PoleError(DomainError):
    """Evaluation at a pole of the q-gamma function."""


class DivisionByZero(QHardyError, ZeroDivisionError):
    """A denominator product or weight sum vanished."""


class EvaluationError(QHardyError, ValueError):
    """A lattice function returned a non-finite or contract-violating value."""


class NonConvergent(QHardyError, ArithmeticError):
    """A truncated series or product hit its cap before the stopping rule fired.

    ``tail`` names the failing tail when that is meaningful
    (``"small-t"`` for k -> +inf, ``"large-t"`` for k -> -inf).
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail
