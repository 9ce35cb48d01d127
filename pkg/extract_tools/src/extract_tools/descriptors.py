"""Descriptor export: run a backbone over every manifest keyframe and write
the binary descriptor container plus its row index.

The container layout is written here independently of the consumer: magic
"CSLD", uint32 version/count/dim little-endian, then count x dim float32
rows, with a ``<path>.idx`` sidecar of ``keyframe_id,row`` lines.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ExportError
from .job import ExportJob
from .models import build_descriptor_model, load_gray_image

CSLD_MAGIC = b"CSLD"
CSLD_VERSION = 1


def compute_descriptors(job: ExportJob) -> tuple[list[str], np.ndarray]:
    model = build_descriptor_model(job.descriptor)
    job.check_images()
    ids: list[str] = []
    rows: list[np.ndarray] = []
    for kf_id in job.manifest.keyframe_ids():
        image = load_gray_image(kf_id, job.image_path(kf_id))
        vector = model.describe_image(image)
        if not np.isfinite(vector).all():
            raise ExportError(f"keyframe {kf_id!r}: non-finite descriptor values")
        ids.append(kf_id)
        rows.append(vector)
    return ids, np.stack(rows).astype("<f4")


def write_descriptor_file(path, ids: list[str], matrix: np.ndarray) -> None:
    path = Path(path)
    count, dim = matrix.shape
    with open(path, "wb") as fh:
        fh.write(CSLD_MAGIC)
        fh.write(struct.pack("<III", CSLD_VERSION, count, dim))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
    index = "".join(f"{kf_id},{row}\n" for row, kf_id in enumerate(ids))
    Path(str(path) + ".idx").write_text(index, encoding="utf-8")


def export_descriptors(job: ExportJob) -> Path:
    ids, matrix = compute_descriptors(job)
    out = job.output_path("descriptors", "descriptors.csld")
    write_descriptor_file(out, ids, matrix)
    return out
