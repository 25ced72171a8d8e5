"""Exception types shared across the package."""


class PairmineError(Exception):
    """Base class for package errors."""


class EmptyCorpusError(PairmineError):
    """Raised when ingestion yields zero usable documents."""


class VectorParseError(PairmineError):
    """Raised on a malformed row in a word-vector file."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class RankDeficiencyError(PairmineError):
    """Raised when projection training data has insufficient rank."""


class ArgumentError(PairmineError, ValueError):
    """Raised on invalid caller-supplied arguments."""


class OracleError(PairmineError):
    """Raised when a label oracle cannot produce a prediction."""


class MissingArtifactError(PairmineError):
    """Raised when a pipeline stage needs an artifact that was never built."""

    def __init__(self, message: str, stage: str):
        super().__init__(message)
        self.stage = stage


class ConflictError(PairmineError):
    """Raised on duplicate submissions or expired leases."""


class PreconditionError(PairmineError):
    """Raised when an aggregation precondition is not met."""
