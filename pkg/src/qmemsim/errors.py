"""Exception types raised across the package."""


class QMemError(Exception):
    """Base class for all package errors."""


class InvalidArgument(QMemError, ValueError):
    pass


class UndefinedNormalization(QMemError, ValueError):
    """A correlation cannot be normalized because a singles rate is zero."""


class InsufficientStatistics(QMemError, ValueError):
    """Too few coincidences to form a ratio."""


class NoSolution(QMemError, ValueError):
    pass


class UndefinedVisibility(QMemError, ValueError):
    pass


class UndefinedSimilarity(QMemError, ValueError):
    pass


class InvalidData(QMemError, ValueError):
    pass


class IllConditionedFit(QMemError, ValueError):
    """Raised when a fit parameter is not constrained by the data.

    ``parameter`` names the offending parameter.
    """

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class IllConditionedReconstruction(QMemError, ValueError):
    pass


class ConfigError(QMemError):
    """Malformed configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StreamParseError(InvalidData):
    """Malformed time-tag file; ``row`` is the 1-based line number in the file."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class SortRequiredError(InvalidData):
    pass
