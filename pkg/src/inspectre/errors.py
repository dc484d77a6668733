"""Exception types raised across the package."""


class InspectreError(Exception):
    """Base class for package errors."""


class ConfigurationError(InspectreError, ValueError):
    """Invalid parameter or configuration."""


class EmptySampleError(InspectreError, ValueError):
    """An estimator was given an empty sample."""


class SensitivityGuardError(InspectreError, ValueError):
    """Exhaustive enumeration refused because the instance is too large."""


class IngestionError(InspectreError, ValueError):
    """Malformed input data.

    ``offset`` is a byte offset for text corpora, ``line`` a 1-based line
    number for count tables.
    """

    def __init__(self, message, *, offset=None, line=None):
        super().__init__(message)
        self.offset = offset
        self.line = line
