"""Exception hierarchy shared across the engine."""


class YieldTrackError(Exception):
    """Base class for all engine errors."""


class DataError(YieldTrackError):
    """Invalid, inconsistent, or referentially broken input data."""


class UndefinedAnnualYieldError(DataError):
    """Both seasons present for a village-year but total maize area is zero."""

    def __init__(self, village_id: str, year: int):
        self.village_id = village_id
        self.year = year
        super().__init__(
            f"annual yield undefined for village {village_id!r} in {year}: "
            "two seasons with zero total maize area"
        )


class DegenerateModelError(YieldTrackError):
    """Too few usable points to fit a trend."""


class EvaluationError(YieldTrackError):
    """A scenario or diagnostic metric could not be computed."""
