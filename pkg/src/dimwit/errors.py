"""Exception hierarchy.

Every domain error derives from :class:`DimwitError` (itself a ``ValueError``)
so callers can catch the whole family; the CLI maps it to exit status 2.
"""


class DimwitError(ValueError):
    """Base class for all validation and domain errors."""


class ShapeMismatch(DimwitError):
    pass


class NegativeEntry(DimwitError):
    pass


class RowSumViolation(DimwitError):
    pass


class OutOfRange(DimwitError):
    pass


class AlphabetTooSmall(DimwitError):
    pass


class AssignmentInvalid(DimwitError):
    pass


class BudgetExceeded(DimwitError):
    pass


class NotUnique(DimwitError):
    pass


class NoWinningAnswer(DimwitError):
    pass


class DimensionMismatch(DimwitError):
    pass


class EpsilonTooLarge(DimwitError):
    pass


class LabelShapeError(DimwitError):
    pass


class InvalidState(DimwitError):
    pass
