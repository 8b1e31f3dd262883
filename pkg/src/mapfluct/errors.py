"""Exception hierarchy.

Every domain failure raised by the toolkit derives from :class:`MapError`.
The CLI maps these to exit code 1 and a JSON error record.
"""


class MapError(Exception):
    """Base class; ``payload`` carries structured diagnostics."""

    def __init__(self, message="", **payload):
        super().__init__(message)
        self.payload = payload

    @property
    def code(self):
        return type(self).__name__


# model validation
class ValidationError(MapError):
    pass


class NegativeRate(ValidationError):
    pass


class BadDiagonal(ValidationError):
    pass


class RowSumExceedsZero(ValidationError):
    pass


class ReducibleGenerator(ValidationError):
    pass


class ReducibleChain(ValidationError):
    pass


class SubordinatorPhase(ValidationError):
    pass


class ModelFormatError(ValidationError):
    pass


# numerics
class SingularSolve(MapError):
    pass


class SingularPivot(MapError):
    pass


class SingularAminus1(SingularPivot):
    pass


class MaxIterExceeded(MapError):
    pass


class ResidualTooLarge(MapError):
    pass


class ZeroArgument(MapError):
    pass


class NoValidAlpha(MapError):
    pass


# regime / preconditions
class NullRecurrent(MapError):
    pass


class NullRecurrentAndSingularA(NullRecurrent):
    pass


class NotDefective(MapError):
    pass


class WrongRegime(MapError):
    pass


class HorizonTooSmall(MapError):
    pass


class ZOutsideDomain(MapError):
    pass


class NoValidRoute(MapError):
    pass


class FluidPhasePresent(MapError):
    pass


# simulation
class CapExceeded(MapError):
    pass
