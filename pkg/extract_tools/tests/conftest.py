import numpy as np
import pytest
import yaml

from extract_tools.job import ExportJob, load_manifest_view


def synth_image(rng: np.random.Generator, base: np.ndarray | None = None,
                size: int = 96) -> np.ndarray:
    """Textured grayscale frame; same-place frames share a base pattern with
    small perturbations so keypoint matchers find correspondences."""
    import cv2

    if base is None:
        image = rng.integers(0, 255, size=(size, size), dtype=np.uint8)
        image = cv2.GaussianBlur(image, (5, 5), 1.2)
        for _ in range(12):
            center = tuple(int(v) for v in rng.integers(10, size - 10, 2))
            radius = int(rng.integers(3, 9))
            shade = int(rng.integers(0, 255))
            cv2.circle(image, center, radius, shade, -1)
        return image
    noise = rng.normal(0.0, 4.0, size=base.shape)
    return np.clip(base.astype(np.float32) + noise, 0, 255).astype(np.uint8)


@pytest.fixture
def session(tmp_path):
    """Two places, two submaps each, images on disk, plus the manifest."""
    import cv2

    rng = np.random.default_rng(17)
    places = {0: synth_image(rng), 1: synth_image(rng)}
    submap_place = {"s000": 0, "s001": 1, "s002": 0, "s003": 1}
    images_dir = tmp_path / "images"
    images_dir.mkdir()
    submaps = []
    t = 0.0
    for sid, place in submap_place.items():
        keyframes = []
        for j in range(3):
            kf_id = f"{sid}_k{j:02d}"
            cv2.imwrite(str(images_dir / f"{kf_id}.png"),
                        synth_image(rng, base=places[place]))
            keyframes.append({"id": kf_id, "timestamp": round(t, 2)})
            t += 0.3
        t += 1.0
        submaps.append({"id": sid, "keyframes": keyframes})
    manifest_path = tmp_path / "manifest.yaml"
    manifest_path.write_text(yaml.safe_dump(
        {"session_id": "synthimg", "descriptor_dim": 64, "submaps": submaps},
        sort_keys=False))
    return tmp_path, manifest_path, submap_place


@pytest.fixture
def job(session):
    tmp_path, manifest_path, _ = session
    return ExportJob(
        manifest=load_manifest_view(manifest_path),
        images_dir=tmp_path / "images",
        descriptor={"model": "gray-grid-proj", "dim": 64, "grid": 8, "seed": 1},
        matcher={"kind": "sift", "ratio": 0.8, "contrast_threshold": 0.02},
        pairs={},
        outputs={},
        base_dir=tmp_path,
    )
