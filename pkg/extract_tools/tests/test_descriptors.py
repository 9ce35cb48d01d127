import numpy as np
import pytest

from extract_tools.descriptors import (compute_descriptors, export_descriptors,
                                       write_descriptor_file)
from extract_tools.errors import ImageError, JobError
from extract_tools.job import ExportJob
from extract_tools.models import (GrayGridModel, GrayGridProjectionModel,
                                  build_descriptor_model)


def test_descriptors_cover_every_keyframe(job):
    ids, matrix = compute_descriptors(job)
    assert ids == job.manifest.keyframe_ids()
    assert matrix.shape == (12, 64)
    assert matrix.dtype == np.dtype("<f4")
    assert np.isfinite(matrix).all()


def test_export_is_byte_identical_on_rerun(job, tmp_path):
    first = tmp_path / "a.csld"
    second = tmp_path / "b.csld"
    ids, matrix = compute_descriptors(job)
    write_descriptor_file(first, ids, matrix)
    ids2, matrix2 = compute_descriptors(job)
    write_descriptor_file(second, ids2, matrix2)
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a.csld.idx").read_text() == \
           (tmp_path / "b.csld.idx").read_text()


def test_missing_image_names_the_keyframe(job, session):
    tmp_path, _, _ = session
    (tmp_path / "images" / "s002_k01.png").unlink()
    with pytest.raises(JobError, match="s002_k01"):
        export_descriptors(job)


def test_corrupted_image_names_the_keyframe(job, session):
    tmp_path, _, _ = session
    (tmp_path / "images" / "s001_k00.png").write_bytes(b"not a png")
    with pytest.raises(ImageError, match="s001_k00"):
        export_descriptors(job)


def test_grid_model_standardizes():
    rng = np.random.default_rng(0)
    image = rng.integers(0, 255, size=(64, 64), dtype=np.uint8)
    vector = GrayGridModel(grid=8).describe_image(image)
    assert vector.shape == (64,)
    assert abs(float(vector.mean())) < 1e-6
    assert float(np.linalg.norm(vector)) == pytest.approx(1.0, abs=1e-5)


def test_projection_model_hits_declared_dimension():
    rng = np.random.default_rng(1)
    image = rng.integers(0, 255, size=(80, 80), dtype=np.uint8)
    model = GrayGridProjectionModel(dim=768, grid=16, seed=0)
    vector = model.describe_image(image)
    assert vector.shape == (768,)
    # same seed, same projection
    again = GrayGridProjectionModel(dim=768, grid=16, seed=0).describe_image(image)
    assert np.array_equal(vector, again)


def test_unknown_model_rejected():
    with pytest.raises(JobError, match="unknown descriptor model"):
        build_descriptor_model({"model": "resnet-from-nowhere"})
