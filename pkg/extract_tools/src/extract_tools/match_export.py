"""Pairwise match-count export.

Keypoints are detected with SIFT (default) or ORB, matched with a two-way
ratio test, and the surviving match count is written per unordered keyframe
pair. The detection threshold is deliberately adjustable downward: weakly
textured endoscopy frames need permissive detection to yield any matches.

Which pairs to match is driven by the engine's sampling strategy: it only
ever compares the first/middle/last keyframes of two submaps, so the pair
generator emits exactly that triplet grid for every submap pair within a
configurable session-order gap (``max_submap_gap: null`` covers all pairs).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import JobError
from .job import ExportJob
from .models import load_gray_image


def _triplet(keyframes: list[str]) -> list[str]:
    n = len(keyframes)
    picked = []
    for index in (0, (n - 1) // 2, n - 1):
        kf = keyframes[index]
        if kf not in picked:
            picked.append(kf)
    return picked


def triplet_grid_pairs(job: ExportJob) -> list[tuple[str, str]]:
    """Unordered keyframe pairs the engine can request, deduplicated."""
    gap = job.pairs.get("max_submap_gap")
    submaps = job.manifest.submaps
    seen: set[tuple[str, str]] = set()
    ordered: list[tuple[str, str]] = []
    for i, (_, kfs_a) in enumerate(submaps):
        for j in range(i + 1, len(submaps)):
            if gap is not None and j - i > int(gap):
                break
            for a in _triplet(kfs_a):
                for b in _triplet(submaps[j][1]):
                    if a == b:
                        continue  # self-pairs are never queried
                    key = (a, b) if a < b else (b, a)
                    if key not in seen:
                        seen.add(key)
                        ordered.append(key)
    return ordered


class KeypointMatcher:
    def __init__(self, spec: dict):
        import cv2

        self.cv2 = cv2
        kind = spec.get("kind", "sift")
        self.ratio = float(spec.get("ratio", 0.8))
        max_features = int(spec.get("max_features", 2000))
        if kind == "sift":
            self.detector = cv2.SIFT_create(
                nfeatures=max_features,
                contrastThreshold=float(spec.get("contrast_threshold", 0.02)))
            self.matcher = cv2.BFMatcher(cv2.NORM_L2)
        elif kind == "orb":
            self.detector = cv2.ORB_create(
                nfeatures=max_features,
                fastThreshold=int(spec.get("fast_threshold", 10)))
            self.matcher = cv2.BFMatcher(cv2.NORM_HAMMING)
        else:
            raise JobError(f"unknown matcher kind {kind!r}")

    def features(self, image):
        _, descriptors = self.detector.detectAndCompute(image, None)
        return descriptors

    def count_matches(self, desc_a, desc_b) -> int:
        if desc_a is None or desc_b is None:
            return 0
        if len(desc_a) < 2 or len(desc_b) < 2:
            return 0
        good = 0
        for pair in self.matcher.knnMatch(desc_a, desc_b, k=2):
            if len(pair) == 2 and pair[0].distance < self.ratio * pair[1].distance:
                good += 1
        return good


def compute_match_counts(job: ExportJob,
                         pairs: list[tuple[str, str]] | None = None,
                         ) -> dict[tuple[str, str], int]:
    matcher = KeypointMatcher(job.matcher)
    if pairs is None:
        pairs = triplet_grid_pairs(job)
    job.check_images()
    features: dict[str, object] = {}

    def features_of(kf_id: str):
        if kf_id not in features:
            image = load_gray_image(kf_id, job.image_path(kf_id))
            features[kf_id] = matcher.features(image)
        return features[kf_id]

    counts: dict[tuple[str, str], int] = {}
    for a, b in pairs:
        if a == b:
            continue
        key = (a, b) if a < b else (b, a)
        if key in counts:
            continue
        counts[key] = matcher.count_matches(features_of(key[0]),
                                            features_of(key[1]))
    return counts


def write_count_file(path, counts: dict[tuple[str, str], int]) -> None:
    lines = [f"{a},{b},{value}" for (a, b), value in sorted(counts.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_match_counts(job: ExportJob,
                        pairs: list[tuple[str, str]] | None = None) -> Path:
    counts = compute_match_counts(job, pairs)
    out = job.output_path("counts", "counts.csv")
    write_count_file(out, counts)
    return out
