"""Exception types raised across the package."""


class WeeklabError(Exception):
    """Base class for every error raised by weeklab."""


class CsvFormatError(WeeklabError, ValueError):
    """A CSV document does not follow the OHLCV export layout."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ValidationError(WeeklabError, ValueError):
    """Well-formed data that violates a domain invariant."""


class EmptySeriesError(WeeklabError, ValueError):
    pass


class InsufficientDataError(WeeklabError, ValueError):
    pass


class DomainError(WeeklabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateDataError(WeeklabError, ValueError):
    """Training data a learner cannot fit (e.g. a single class)."""


class HorizonTooLargeError(WeeklabError, ValueError):
    pass


class FetchError(WeeklabError):
    """Transport-level failure talking to a remote data provider."""


class ConfigError(WeeklabError, ValueError):
    pass
