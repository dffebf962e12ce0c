"""Exception hierarchy.

Every failure raised by a pipeline stage derives from :class:`StageError` so
the CLI can map it to exit status 3; verification failures are reported as
data, not exceptions.
"""


class StageError(Exception):
    """Base class; ``stage`` is filled in by the pipeline when propagating."""

    stage: str | None = None

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def tagged(self, stage: str) -> "StageError":
        self.stage = stage
        return self

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class SingularMatrix(StageError):
    pass


class OutOfRadius(StageError):
    pass


class NotDivisible(StageError):
    def __init__(self, message: str = "", remainder=None, **details):
        super().__init__(message, **details)
        self.remainder = remainder


class EmptyBand(StageError):
    pass


class ZeroMargin(StageError):
    pass


class UnboundedQuotient(StageError):
    pass


class NotUnipotent(StageError):
    pass


class SmallPivot(StageError):
    pass


class PivotVanishes(StageError):
    pass


class CoverDoesNotContainZeroSet(StageError):
    pass


class NotIdentityNearZeroSet(StageError):
    pass


class CannotSatisfy(StageError):
    pass


class ZeroSetsIntersect(StageError):
    pass


class CommonZero(StageError):
    pass


class NoSeparatingNeighborhood(StageError):
    pass


class CannotTaper(StageError):
    pass


class SizeGuard(StageError):
    pass


class InvalidInput(StageError):
    """Malformed files, inconsistent bundles, bad homotopies, unknown ids."""
