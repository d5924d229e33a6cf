"""Exception hierarchy shared by every module.

The CLI maps ``UnsupportedInput`` subclasses to exit code 2 and
``OutOfRange`` subclasses to exit code 3.
"""


class ArtifactError(Exception):
    """Base class for all library errors."""


class UnsupportedInput(ArtifactError):
    pass


class OutOfRange(ArtifactError):
    pass


# groups
class NotAGroup(ArtifactError):
    pass


class BadParity(ArtifactError):
    pass


class BadGrading(ArtifactError):
    pass


# superalg
class ScalarMismatch(ArtifactError):
    pass


class DimensionMismatch(ArtifactError):
    pass


class NotCliffordForm(UnsupportedInput):
    pass


# kfree
class RangeExceeded(OutOfRange):
    pass


class UnsupportedGroup(UnsupportedInput):
    pass


# steenrod
class UnknownName(UnsupportedInput):
    pass


class FlavorMismatch(ArtifactError):
    pass


# extengine
class TruncationTooSmall(OutOfRange):
    pass


class WindowExceeded(OutOfRange):
    pass


class DegreeBeyondABPTable(OutOfRange):
    pass


# spiral
class BothZero(UnsupportedInput):
    pass


class StepNotDefined(UnsupportedInput):
    pass
