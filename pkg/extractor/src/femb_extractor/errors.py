"""Named error types for the extraction pipeline."""


class ExtractionError(Exception):
    """Base class; `.name` is the stable identifier printed by the CLI."""

    @property
    def name(self) -> str:
        return type(self).__name__


class BadAudio(ExtractionError):
    """File missing, unreadable, or not a PCM WAV we can decode."""


class CheckpointLoadFailure(ExtractionError):
    """The TorchScript checkpoint could not be loaded or run."""


class FrameRateMismatch(ExtractionError):
    """The model's hop does not produce the expected 20 ms frame rate."""
