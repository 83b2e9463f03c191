"""Exception hierarchy shared across the package.

The CLI maps these to exit codes: DatasetError and I/O failures exit 1,
domain errors (ColdStartError, UnknownBackendError) exit 2.
"""


class RankRecError(Exception):
    """Base class for all rankrec errors."""


class DatasetError(RankRecError):
    """Base class for rating-file and split problems."""


class ParseError(DatasetError):
    """Malformed input line (wrong field count, non-integer field, bad id)."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class RatingRangeError(DatasetError):
    """Rating value outside the expected (min, max) range."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DuplicateRatingError(DatasetError):
    """The same (user, item) pair was rated more than once."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class SplitOverlapError(DatasetError):
    """A (user, item) pair appears in both the train and test portions."""


class ColdStartError(RankRecError):
    """The active user is unknown or has no training ratings."""


class UnknownBackendError(RankRecError):
    """Requested ranking backend name is not registered."""

    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(
            f"unknown backend {name!r}; available backends: {self.available}"
        )


class EmptyRankingError(RankRecError):
    """Aggregation was asked to average over an empty ranking list."""
