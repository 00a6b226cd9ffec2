"""Exception types shared across the package."""

from __future__ import annotations


class SarcragError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SarcragError):
    """Invalid or missing run configuration."""


class FormatError(SarcragError):
    """A dataset file does not match its expected layout."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TransportError(SarcragError):
    """The chat backend could not be reached or returned a bad payload."""


class EmptyResponse(SarcragError):
    """The chat backend answered with empty or whitespace-only text."""


class MissingTranscript(SarcragError):
    """Replay was asked for a request that was never recorded."""

    def __init__(self, digest: str) -> None:
        super().__init__(f"no recorded response for request digest {digest}")
        self.digest = digest


class MalformedCSV(SarcragError):
    """Keyword-cleaning output was not parseable as comma-separated values."""


class TaggerError(SarcragError):
    """The token tagger failed or returned an unusable payload."""


class TemplateLanguageMismatch(SarcragError):
    """Prompt templates do not match the sample's language."""


class SearchTransportError(SarcragError):
    """The search engine could not be reached or returned a bad payload."""


class SearchQuotaExceeded(SearchTransportError):
    """The search engine rejected the request for quota reasons."""


class StoreWriteError(SarcragError):
    """A cache or transcript write failed."""


class LogParseError(SarcragError):
    """A run log line could not be parsed."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(SarcragError):
    """A numeric argument lies outside the function's domain."""


class DefinitionUnavailable(SarcragError):
    """No text evidence was available to build a definition from."""


class VerdictNotFound(SarcragError):
    """The reflection answer contained no standalone YES or NO."""


class SampleSkipped(SarcragError):
    """A single sample could not be scored; the run should continue."""

    def __init__(self, sample_id: str, reason: str) -> None:
        super().__init__(f"{sample_id}: {reason}")
        self.sample_id = sample_id
        self.reason = reason


class UnknownSampleId(SarcragError):
    """A prediction refers to a sample id absent from the gold set."""


class DuplicatePrediction(SarcragError):
    """Two predictions were supplied for the same sample id."""


class EmptyEvaluation(SarcragError):
    """Metrics were requested but no sample was scored."""
