"""Exception hierarchy shared by all modules."""


class AdicError(Exception):
    """Base class for every error raised by this package."""


class EmptyRowOrColumn(AdicError):
    pass


class NotPrimitive(AdicError):
    pass


class NoConvergence(AdicError):
    pass


class MaximalPoint(AdicError):
    """The point has no successor in the reverse lexicographic order."""


class MinimalPoint(AdicError):
    """The point has no predecessor in the reverse lexicographic order."""


class DepthTooLarge(AdicError):
    pass


class InadmissibleWord(AdicError):
    pass


class IntegerOverflow(AdicError):
    pass


class NotTailEquivalent(AdicError):
    pass


class PeriodBudgetExceeded(AdicError):
    pass


class EigenvalueCollision(AdicError):
    pass


class BudgetExceeded(AdicError):
    pass


class DegenerateGamma(AdicError):
    pass


class OutOfSupport(AdicError):
    pass


class NotAlmostOnto(AdicError):
    pass


class ReturnBudgetExceeded(AdicError):
    pass


class ConfigError(AdicError):
    pass


class UnknownSuite(AdicError):
    pass
