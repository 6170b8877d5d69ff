"""Exception types shared across the toolkit."""


class RecapitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(RecapitError):
    """A manifest or payload violates the schema or a type invariant.

    ``field`` carries the dotted path of the offending entry, e.g.
    ``aois[2].polygon[0]``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class MissingSourceError(RecapitError):
    """A referenced file or directory does not exist."""

    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"missing source file: {self.path}")


class ParseError(RecapitError):
    """A raw source file could not be parsed.

    ``location`` is a human-readable position (line number or filename).
    """

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


class NotFoundError(RecapitError):
    """An id did not resolve to any known entity."""


class ConflictError(RecapitError):
    """A write was based on a stale project version."""


class ProviderError(RecapitError):
    """An external embedding/title provider failed."""
