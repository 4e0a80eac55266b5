"""Exception types shared across the package."""


class PreorderingError(Exception):
    """Base class for all errors raised by this package."""


class DataError(PreorderingError):
    """Malformed or mutually inconsistent input data."""


class TreeParseError(DataError):
    """A bracketed tree expression could not be parsed or validated."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at character {offset})"
        super().__init__(message)
        self.offset = offset


class AlignmentError(DataError):
    """A word-alignment line violates the expected format or bounds."""


class ModelFormatError(DataError):
    """A model file is corrupt or has an unsupported version."""


class NumericError(PreorderingError):
    """A numeric quantity became non-finite during training or inference."""
