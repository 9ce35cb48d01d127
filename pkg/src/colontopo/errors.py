"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: FormatError / ConfigError mean bad
inputs (exit 2), PipelineError means the mapping run itself failed (exit 1).
"""

from __future__ import annotations


class ColontopoError(Exception):
    """Base class for every error raised by this package."""


class FormatError(ColontopoError):
    """A file failed to parse or violated its documented format."""

    def __init__(self, path, detail: str, *, line: int | None = None,
                 offset: int | None = None):
        self.path = str(path)
        self.detail = detail
        self.line = line
        self.offset = offset
        location = self.path if line is None else f"{self.path}:{line}"
        message = f"{location}: {detail}"
        if offset is not None:
            message += f" (byte offset {offset})"
        super().__init__(message)


class ConfigError(ColontopoError):
    """Invalid configuration value or combination of settings."""


class PipelineError(ColontopoError):
    """Runtime failure while building or evaluating a map."""


class GraphError(PipelineError):
    """Topological graph operation violated a structural invariant."""


class BackendError(PipelineError):
    """A similarity or matching backend could not answer a query."""


class UnknownIdError(BackendError):
    """A keyframe or submap id could not be resolved."""

    def __init__(self, kind: str, identifier: str):
        self.kind = kind
        self.identifier = identifier
        super().__init__(f"unknown {kind} id: {identifier!r}")


class DimensionError(PipelineError):
    """Vector dimensions do not agree."""
