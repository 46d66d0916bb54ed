"""Exception hierarchy shared across the pipeline.

``ConfigError`` and its subclasses map to CLI exit code 2, ``PipelineError``
and its subclasses to exit code 1.
"""

from __future__ import annotations


class CrewlineError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CrewlineError):
    """Bad configuration or unusable input files."""


class IngestError(ConfigError):
    """An input corpus could not be parsed."""


class MalformedRecord(IngestError):
    def __init__(self, block: int, reason: str, path: str | None = None):
        self.block = block
        self.reason = reason
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}block {block}: {reason}")


class BadSiren(IngestError):
    def __init__(self, row: int, value: str):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: SIREN {value!r} is not exactly 9 digits")


class HeaderMismatch(IngestError):
    def __init__(self, missing: list[str], path: str | None = None):
        self.missing = missing
        where = f"{path}: " if path else ""
        super().__init__(f"{where}missing required columns {missing}")


class BadRow(IngestError):
    def __init__(self, row: int, reason: str):
        self.row = row
        super().__init__(f"row {row}: {reason}")


class OrphanReview(IngestError):
    def __init__(self, line: int):
        self.line = line
        super().__init__(f"line {line}: review appears before any '## <company>' heading")


class UnparsableMoney(IngestError, ValueError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"cannot parse money amount {text!r}")


class UnparsableDate(IngestError, ValueError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"cannot parse date {text!r}")


class BadParams(CrewlineError, ValueError):
    """Invalid numeric parameters (chunk sizes, thresholds, ...)."""


class DuplicateChunk(CrewlineError, ValueError):
    def __init__(self, ref: tuple[str, int]):
        self.ref = ref
        super().__init__(f"duplicate chunk ref {ref!r}")


class PipelineError(CrewlineError):
    """Runtime failure of a pipeline stage."""


class GatewayError(PipelineError):
    """Failure talking to (or replaying) a language model."""


class ProviderError(GatewayError):
    def __init__(self, status: int | None, body: str):
        self.status = status
        self.body = body[:300]
        super().__init__(f"provider returned status {status}: {self.body}")


class Timeout(GatewayError):
    pass


class ReplayMismatch(GatewayError):
    def __init__(self, position: int, expected: str, got: str):
        self.position = position
        self.expected = expected
        self.got = got
        super().__init__(
            f"transcript entry {position}: expected fingerprint {expected}, got {got}"
        )


class ReplayExhausted(GatewayError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"transcript exhausted after {position} entries")


class JsonExtractionError(PipelineError, ValueError):
    pass


class NoJsonFound(JsonExtractionError):
    def __init__(self):
        super().__init__("no JSON object or array found in text")


class JsonSyntax(JsonExtractionError):
    def __init__(self, position: int, msg: str):
        self.position = position
        super().__init__(f"invalid JSON at position {position}: {msg}")


class SchemaError(PipelineError, ValueError):
    """Parsed JSON does not have the shape a task expects."""


class TaskFailed(PipelineError):
    def __init__(self, task_index: int, cause: BaseException):
        self.task_index = task_index
        self.cause = cause
        super().__init__(f"task {task_index} failed: {type(cause).__name__}: {cause}")
