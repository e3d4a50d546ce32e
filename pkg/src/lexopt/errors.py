"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, numeric failures exit 3.
"""


class LexoptError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LexoptError):
    """Invalid configuration or parameters (bad weights, k < 2, ...)."""


class DataError(LexoptError):
    """Problem with input data rather than with configuration."""


class ParseError(DataError):
    """Malformed input file.

    ``line_no`` is 1-based when the error can be pinned to a line.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(DataError):
    """Well-formed input that violates a documented constraint."""


class CoverageError(DataError):
    """An operation needed words that its inputs do not cover."""

    def __init__(self, message: str, missing: tuple[str, ...] | list[str] = ()):
        self.missing = tuple(missing)
        if self.missing:
            shown = ", ".join(repr(m) for m in self.missing[:10])
            more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class DecodeError(DataError):
    """A symbol stream cannot be decoded; carries the failing symbol offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (symbol offset {offset})")
        self.offset = offset


class NumericError(LexoptError):
    """Numeric failure during optimization or scoring."""
