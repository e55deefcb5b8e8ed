"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class DictionaryFormatError(EngineError):
    """A dictionary file violated the one-term-per-line format."""


class EmptyDictionaryError(EngineError):
    """A dictionary file yielded zero usable terms."""


class RecordParseError(EngineError):
    """A line-delimited record file contained a malformed record."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateIdError(EngineError):
    """Two posts (or two index insertions) share the same id."""


class WrongSourceError(EngineError):
    """A post's source is not allowed for the operation at hand."""


class SnapshotError(EngineError):
    """An index snapshot is corrupt, truncated, or of an unknown format."""
