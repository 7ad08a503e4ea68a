"""Exception hierarchy shared by all modules."""


class FMCalcError(Exception):
    """Base class for every error raised by fmcalc."""


class PresentationMismatch(FMCalcError):
    pass


class NotNilpotent(FMCalcError):
    pass


class NotUnitOne(FMCalcError):
    pass


class UnknownCatalogEntry(FMCalcError):
    pass


class InconsistentCustomLattice(FMCalcError):
    pass


class WrongKind(FMCalcError):
    pass


class NegativeRank(FMCalcError):
    pass


class NonPositiveRank(FMCalcError):
    pass


class NotSUn(FMCalcError):
    pass


class EmptyRange(FMCalcError):
    pass


class DimensionMismatch(FMCalcError):
    pass


class ZeroRank(FMCalcError):
    pass


class ZeroSupportDegree(FMCalcError):
    pass


class ScenarioError(FMCalcError):
    """Scenario text could not be turned into a valid Scenario.

    ``location`` is a dotted key path or ``line N, column M``.
    """

    def __init__(self, message, location=None):
        self.location = location
        text = message if location is None else f"{location}: {message}"
        super().__init__(text)


class ScenarioSyntaxError(ScenarioError):
    pass


class UnknownKey(ScenarioError):
    pass


class BadFraction(ScenarioError):
    pass
