"""Exception hierarchy shared across the toolkit.

Every data-level failure raises a named subclass of ToolkitError so the CLI
can map it to a stable error name and exit code.
"""


class ToolkitError(Exception):
    """Base class for all data errors raised by this package."""

    @property
    def name(self) -> str:
        return type(self).__name__


# annotations
class MalformedLine(ToolkitError):
    pass


class NonContiguous(ToolkitError):
    pass


class EmptyUtterance(ToolkitError):
    pass


class NonPositiveDuration(ToolkitError):
    pass


class EmptyInventory(ToolkitError):
    pass


# framing
class WindowOutOfRange(ToolkitError):
    pass


# embedding container / dataset assembly
class BadMagic(ToolkitError):
    pass


class TruncatedPayload(ToolkitError):
    pass


class UnsupportedVersion(ToolkitError):
    pass


class NonFiniteValue(ToolkitError):
    pass


class MissingUtterance(ToolkitError):
    pass


class FrameIndexOutOfRange(ToolkitError):
    pass


class UnknownSymbol(ToolkitError):
    pass


class FrameRateMismatch(ToolkitError):
    pass


class EmptySide(ToolkitError):
    pass


class UnknownSpeaker(ToolkitError):
    pass


# probe
class ShapeMismatch(ToolkitError):
    pass


class NonFiniteActivation(ToolkitError):
    pass


class TargetOutOfRange(ToolkitError):
    pass


class EmptyDataset(ToolkitError):
    pass


class ArchitectureMismatch(ToolkitError):
    pass


# metrics
class LengthMismatch(ToolkitError):
    pass


class Empty(ToolkitError):
    pass


class ClassWithoutSupport(ToolkitError):
    pass


# decoder
class DimensionMismatch(ToolkitError):
    pass


class UnorderedInput(ToolkitError):
    pass


# synthgen
class InvalidConfig(ToolkitError):
    pass
