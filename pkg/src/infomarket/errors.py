"""Exception hierarchy shared by every module."""


class InfoMarketError(Exception):
    """Base class for all package errors."""


class AllZero(InfoMarketError, ValueError):
    pass


class IndexOutOfRange(InfoMarketError, IndexError):
    pass


class InvalidState(InfoMarketError, ValueError):
    pass


class ParseError(InfoMarketError, ValueError):
    """Malformed input record. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(InfoMarketError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateId(InfoMarketError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyMarket(InfoMarketError, ValueError):
    pass


class NoWinner(SchemaError):
    pass


class TooFewSamples(InfoMarketError, ValueError):
    pass


class TooFewPoints(InfoMarketError, ValueError):
    pass


class NoSamples(InfoMarketError, ValueError):
    pass


class TooShort(InfoMarketError, ValueError):
    pass


class EmptySide(InfoMarketError, ValueError):
    pass


class NoFeatures(InfoMarketError, ValueError):
    pass


class InvalidCounts(InfoMarketError, ValueError):
    pass


class ConfigError(InfoMarketError, ValueError):
    pass


class InsufficientSamples(InfoMarketError, ValueError):
    pass
