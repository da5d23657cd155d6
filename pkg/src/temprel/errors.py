"""Exception types shared across the package."""


class TemprelError(Exception):
    """Base class for all package errors."""


class TimeMLParseError(TemprelError):
    """Malformed TimeML input; carries the XML parser's line/column."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class StructuralError(TemprelError):
    """Input is well-formed but violates a structural requirement."""


class AlignmentError(TemprelError):
    """An annotation cannot be resolved against tokens or declared ids."""


class FormatError(TemprelError):
    """Bad record in a line-oriented file; carries the line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class UnsupportedValueError(TemprelError):
    """A TIMEX value that the date normalizer does not handle."""


class ShapeError(TemprelError):
    """Array dimensions do not match a layer's configuration."""


class DivergenceError(TemprelError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, learning_rate):
        super().__init__(
            f"non-finite loss at epoch {epoch} (learning rate {learning_rate})"
        )
        self.epoch = epoch
        self.learning_rate = learning_rate


class ScopeError(TemprelError):
    """A predicted pair falls outside the gold evaluation scope."""
