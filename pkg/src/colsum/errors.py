"""Exception types shared across the pipeline."""


class ColsumError(Exception):
    """Base class for all package errors."""


class CorpusFormatError(ColsumError):
    """A corpus source could not be parsed (bad record, duplicate id, ...)."""

    def __init__(self, message, record=None):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)
        self.record = record


class LexiconFormatError(ColsumError):
    """A lexicon file line failed validation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BackendError(ColsumError):
    """A remote backend call failed.

    ``retryable`` distinguishes transient faults (connection refused, rate
    limits) from permanent ones (bad request, auth).
    """

    retryable = False

    def __init__(self, message, retryable=None):
        super().__init__(message)
        if retryable is not None:
            self.retryable = retryable


class BackendUnreachableError(BackendError):
    retryable = True


class RateLimitError(BackendError):
    retryable = True


class ContextOverflowError(BackendError):
    """Prompt exceeds the backend context window; caller should re-split."""

    retryable = False


class ConfigError(ColsumError):
    """Pipeline configuration failed validation."""


class StageError(ColsumError):
    """A pipeline stage failed; carries the stage name for diagnosis."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage


class LockError(ColsumError):
    """Another run already owns the output directory."""
