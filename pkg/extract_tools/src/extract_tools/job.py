"""Export job descriptions.

A job names the session manifest, the keyframe image directory, the model
and matcher settings, and the output paths. Images are looked up as
``<images_dir>/<keyframe_id>.<ext>`` with png preferred over jpg.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import JobError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass
class ManifestView:
    """The subset of the session manifest the exporters need."""
    session_id: str
    descriptor_dim: int
    submaps: list[tuple[str, list[str]]]  # (submap id, ordered keyframe ids)

    def keyframe_ids(self) -> list[str]:
        return [kf for _, kfs in self.submaps for kf in kfs]


def load_manifest_view(path) -> ManifestView:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise JobError(f"{path}: invalid YAML: {exc}") from None
    try:
        submaps = [(str(sm["id"]), [str(kf["id"]) for kf in sm["keyframes"]])
                   for sm in data["submaps"]]
        return ManifestView(session_id=str(data["session_id"]),
                            descriptor_dim=int(data["descriptor_dim"]),
                            submaps=submaps)
    except (KeyError, TypeError) as exc:
        raise JobError(f"{path}: manifest missing field: {exc}") from None


@dataclass
class ExportJob:
    manifest: ManifestView
    images_dir: Path
    descriptor: dict = field(default_factory=dict)
    matcher: dict = field(default_factory=dict)
    pairs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def image_path(self, keyframe_id: str) -> Path:
        for ext in IMAGE_EXTENSIONS:
            candidate = self.images_dir / f"{keyframe_id}{ext}"
            if candidate.exists():
                return candidate
        raise JobError(f"keyframe {keyframe_id!r} has no image under "
                       f"{self.images_dir}")

    def check_images(self) -> None:
        for kf_id in self.manifest.keyframe_ids():
            self.image_path(kf_id)

    def output_path(self, name: str, default: str) -> Path:
        return self.base_dir / self.outputs.get(name, default)


def load_job(path) -> ExportJob:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise JobError(f"job file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise JobError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise JobError(f"{path}: job document must be a mapping")
    base = path.parent
    try:
        manifest = load_manifest_view(base / data["manifest"])
        images_dir = base / data["images_dir"]
    except KeyError as exc:
        raise JobError(f"{path}: job missing field {exc}") from None
    if not images_dir.is_dir():
        raise JobError(f"images directory not found: {images_dir}")
    return ExportJob(
        manifest=manifest,
        images_dir=images_dir,
        descriptor=data.get("descriptor", {}),
        matcher=data.get("matcher", {}),
        pairs=data.get("pairs", {}),
        outputs=data.get("outputs", {}),
        base_dir=base,
    )
