"""Exception hierarchy shared by every module."""


class QKError(Exception):
    """Base class for all package errors."""


class DimensionError(QKError, ValueError):
    """Shapes or dimensions of the inputs do not agree."""


class DomainError(QKError, ValueError):
    """A parameter lies outside the range where the operation is defined."""


class NumericError(QKError, ArithmeticError):
    """Non-finite values or a singular matrix where an inverse is required."""


class RetractionError(NumericError):
    """A matrix could not be projected back onto its group."""


class RankError(QKError, ValueError):
    """A graph is disconnected where connectivity is required."""


class ConsistencyError(QKError, ValueError):
    """A forcing vector violates the zero-sum condition."""


class PreconditionError(QKError, ValueError):
    """A configuration is not a fixed point where one is required."""


class ConstructionError(QKError, ValueError):
    """A solution specification cannot be realised (e.g. it does not close)."""


class BlowUpError(QKError, RuntimeError):
    """The integrated state left every bounded region.

    Attributes:
        t: time of the last accepted step.
    """

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t
