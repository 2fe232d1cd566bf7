"""Exception types raised by the library."""


class ICMError(ValueError):
    """Base class for all input and domain errors."""


class NegativeMass(ICMError):
    pass


class PriorNotPositive(ICMError):
    pass


class SumOutOfTolerance(ICMError):
    pass


class ShapeMismatch(ICMError):
    pass


class RhoOutOfRange(ICMError):
    pass


class AllModelsZeroLikelihood(ICMError):
    """Every model assigns zero probability to some observed point."""


class AllInfiniteKL(ICMError):
    """No model is absolutely continuous with respect to the truth."""


class EmptyBlock(ICMError):
    pass


class InvalidCover(ICMError):
    pass


class NotAPartition(InvalidCover):
    pass


class ParameterDomain(ICMError):
    pass


class ProductSpaceTooLarge(ICMError):
    pass


class ConfigInfeasible(ICMError):
    pass


class InputFormatError(ICMError):
    """A JSON input file has missing, unknown or mistyped fields."""


class NonConvergenceWarning(RuntimeWarning):
    """The hull optimizer stopped at its iteration cap; the best iterate is returned."""
