"""Errors raised by the export tools."""


class ExportError(Exception):
    """Base class for export failures."""


class JobError(ExportError):
    """Invalid job description or missing inputs."""


class ImageError(ExportError):
    """An image could not be read or decoded."""

    def __init__(self, keyframe_id: str, path, detail: str = ""):
        self.keyframe_id = keyframe_id
        self.path = str(path)
        message = f"keyframe {keyframe_id!r}: cannot read image {self.path}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class CheckpointError(ExportError):
    """A model checkpoint does not match the expected classifier shape."""
