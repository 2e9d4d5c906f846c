"""Exception types raised across the package."""


class CollusionPirError(Exception):
    """Base class for all package errors."""


class BadParams(CollusionPirError, ValueError):
    pass


class OutOfRangeIndex(BadParams):
    pass


class EmptySet(BadParams):
    pass


class UncoveredServer(BadParams):
    pass


class TooLarge(CollusionPirError):
    """Input exceeds an enumeration cap."""


class DualityMismatch(CollusionPirError, ArithmeticError):
    """Packing and covering optima disagree; indicates a solver bug."""


class UnknownQuery(CollusionPirError, KeyError):
    pass


class ZeroDownload(CollusionPirError):
    pass


class IncommensurableAlphabets(CollusionPirError):
    """log|X| / log|Y| is not rational."""


class NotDecomposable(CollusionPirError):
    pass


class SizeMismatch(BadParams):
    pass


class NotDivisible(BadParams):
    pass


class BudgetExhausted(CollusionPirError):
    """Search stopped at its node budget without finding or ruling out a scheme."""
