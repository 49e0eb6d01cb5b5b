class NoteCnnError(Exception):
    """Base class for every error raised by notecnn."""


class ArgumentError(NoteCnnError, ValueError):
    """A caller passed arguments that violate an operation's preconditions."""


class DataFormatError(NoteCnnError, ValueError):
    """Input or artifact files could not be parsed or do not match the expected schema."""

    def __init__(self, message: str, path=None, line=None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class CohortValidationError(DataFormatError):
    """Admission timelines that are internally inconsistent (overlaps, reversed times, duplicates)."""


class NumericError(NoteCnnError, ArithmeticError):
    """Non-finite values appeared during a forward pass or training."""

    def __init__(self, message: str, location=None, epoch=None):
        self.location = location
        self.epoch = epoch
        parts = [message]
        if location is not None:
            parts.append(f"location={location}")
        if epoch is not None:
            parts.append(f"epoch={epoch}")
        super().__init__(", ".join(parts))


class DimensionError(ArgumentError):
    """Array shapes are inconsistent with an operation (e.g. a note shorter than a filter)."""
