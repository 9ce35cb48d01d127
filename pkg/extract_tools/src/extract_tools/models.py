"""Descriptor backbones.

Every backbone maps a grayscale image to a fixed-length float32 vector and
must be bit-deterministic across runs so exports reproduce exactly. Trained
production backbones plug in as TorchScript modules; the grid models are
lightweight deterministic stand-ins that keep the pipeline runnable without
redistributable weights.
"""

from __future__ import annotations

import numpy as np

from .errors import ImageError, JobError


def load_gray_image(keyframe_id: str, path) -> np.ndarray:
    import cv2

    image = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if image is None:
        raise ImageError(keyframe_id, path, "decode failed")
    return image


class GrayGridModel:
    """Mean-intensity grid: resize to g x g, flatten, standardize."""

    def __init__(self, grid: int = 16):
        if grid < 1:
            raise JobError(f"grid size must be positive, got {grid}")
        self.grid = grid
        self.dim = grid * grid

    def describe_image(self, image: np.ndarray) -> np.ndarray:
        import cv2

        cells = cv2.resize(image, (self.grid, self.grid),
                           interpolation=cv2.INTER_AREA).astype(np.float32)
        flat = cells.reshape(-1)
        flat -= flat.mean()
        norm = float(np.linalg.norm(flat))
        if norm > 0:
            flat /= norm
        return flat.astype(np.float32)


class GrayGridProjectionModel:
    """Grid features pushed through a fixed seeded Gaussian projection, so
    the output dimension matches a production embedding size (768 by
    default) without trained weights."""

    def __init__(self, dim: int = 768, grid: int = 16, seed: int = 0):
        self.inner = GrayGridModel(grid)
        self.dim = int(dim)
        if self.dim < 1:
            raise JobError(f"projection dim must be positive, got {dim}")
        rng = np.random.default_rng(seed)
        self.projection = rng.normal(
            0.0, 1.0 / np.sqrt(self.inner.dim),
            size=(self.dim, self.inner.dim)).astype(np.float32)

    def describe_image(self, image: np.ndarray) -> np.ndarray:
        grid_features = self.inner.describe_image(image)
        out = self.projection @ grid_features
        norm = float(np.linalg.norm(out))
        if norm > 0:
            out /= norm
        return out.astype(np.float32)


class TorchScriptModel:
    """User-provided TorchScript backbone: grayscale image resized to
    ``image_size``, scaled to [0, 1], shaped (1, 1, H, W)."""

    def __init__(self, path, dim: int, image_size: int = 224):
        import torch

        torch.set_num_threads(1)  # keeps reductions bit-stable
        self.torch = torch
        try:
            self.module = torch.jit.load(str(path), map_location="cpu")
        except (RuntimeError, ValueError, FileNotFoundError) as exc:
            raise JobError(f"cannot load torchscript model {path}: {exc}") from None
        self.module.eval()
        self.dim = int(dim)
        self.image_size = int(image_size)

    def describe_image(self, image: np.ndarray) -> np.ndarray:
        import cv2

        resized = cv2.resize(image, (self.image_size, self.image_size),
                             interpolation=cv2.INTER_AREA)
        tensor = self.torch.from_numpy(resized.astype(np.float32) / 255.0)
        tensor = tensor.reshape(1, 1, self.image_size, self.image_size)
        with self.torch.no_grad():
            out = self.module(tensor)
        vector = out.detach().cpu().numpy().reshape(-1).astype(np.float32)
        if vector.shape[0] != self.dim:
            raise JobError(f"torchscript model produced dimension "
                           f"{vector.shape[0]}, job declares {self.dim}")
        return vector


def build_descriptor_model(spec: dict):
    kind = spec.get("model", "gray-grid-proj")
    if kind == "gray-grid":
        return GrayGridModel(grid=int(spec.get("grid", 16)))
    if kind == "gray-grid-proj":
        return GrayGridProjectionModel(dim=int(spec.get("dim", 768)),
                                       grid=int(spec.get("grid", 16)),
                                       seed=int(spec.get("seed", 0)))
    if kind == "torchscript":
        if "path" not in spec:
            raise JobError("torchscript model requires 'path'")
        return TorchScriptModel(spec["path"], dim=int(spec.get("dim", 768)),
                                image_size=int(spec.get("image_size", 224)))
    raise JobError(f"unknown descriptor model {kind!r}")
