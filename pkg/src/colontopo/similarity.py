"""Pairwise image-similarity scoring.

Three interchangeable backends produce a score in [0, 1] for a pair of
keyframe ids: an MLP classifier running on stored global descriptors, a
precomputed score table, and a synthetic oracle for controlled experiments.

The MLP route subtracts descriptors before inference, so the score is not
symmetric in general. The convention throughout is query first, candidate
second: ``g = d_query - d_candidate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol

import numpy as np

from .errors import BackendError, ConfigError, DimensionError, UnknownIdError
from .seeding import pair_rng

ACTIVATIONS = ("relu", "none")


@dataclass
class MlpLayer:
    weights: np.ndarray  # shape (out, in)
    bias: np.ndarray     # shape (out,)
    activation: str


@dataclass
class MlpWeights:
    layers: list[MlpLayer]
    input_dim: int
    positive_class_index: int = 0

    def validate(self) -> None:
        if not self.layers:
            raise ConfigError("MLP has no layers")
        if self.input_dim <= 0:
            raise ConfigError(f"MLP input dimension must be positive, got {self.input_dim}")
        if self.positive_class_index not in (0, 1):
            raise ConfigError(f"positive class index must be 0 or 1, "
                              f"got {self.positive_class_index}")
        expected_in = self.input_dim
        for index, layer in enumerate(self.layers):
            if layer.weights.ndim != 2:
                raise ConfigError(f"layer {index} weight matrix must be 2-d")
            out_dim, in_dim = layer.weights.shape
            if in_dim != expected_in:
                if index == 0:
                    raise ConfigError(f"layer 0 expects input {in_dim}, "
                                      f"declared input dimension is {self.input_dim}")
                raise ConfigError(f"layer {index} expects input {in_dim}, "
                                  f"layer {index - 1} produces {expected_in}")
            if layer.bias.shape != (out_dim,):
                raise ConfigError(f"layer {index} bias length {layer.bias.shape[0]} "
                                  f"does not match {out_dim} outputs")
            if layer.activation not in ACTIVATIONS:
                raise ConfigError(f"layer {index} has unknown activation "
                                  f"{layer.activation!r}")
            if not (np.isfinite(layer.weights).all() and np.isfinite(layer.bias).all()):
                raise ConfigError(f"layer {index} contains non-finite values")
            expected_in = out_dim
        if expected_in != 2:
            raise ConfigError(f"final layer must produce 2 logits, got {expected_in}")


def descriptor_diff(query: np.ndarray, candidate: np.ndarray) -> np.ndarray:
    """Componentwise difference, query minus candidate."""
    query = np.asarray(query, dtype=np.float64)
    candidate = np.asarray(candidate, dtype=np.float64)
    if query.shape != candidate.shape:
        raise DimensionError(f"descriptor dimensions differ: "
                             f"{query.shape[0]} vs {candidate.shape[0]}")
    return query - candidate


def mlp_forward(weights: MlpWeights, g: np.ndarray) -> np.ndarray:
    """Affine-then-activation chain; returns the two pre-softmax logits."""
    x = np.asarray(g, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != weights.input_dim:
        raise DimensionError(f"input has dimension {x.shape[-1] if x.ndim else 0}, "
                             f"MLP expects {weights.input_dim}")
    for index, layer in enumerate(weights.layers):
        with np.errstate(over="ignore", invalid="ignore"):
            x = layer.weights @ x + layer.bias
        if layer.activation == "relu":
            x = np.maximum(x, 0.0)
        if not np.isfinite(x).all():
            raise BackendError(f"non-finite activation after layer {index}")
    return x


def softmax_sim(logits, positive_index: int = 0) -> float:
    """Two-class softmax probability of the positive ("same place") class.

    Computed with max-subtraction so extreme logits cannot overflow.
    """
    z_pos = float(logits[positive_index])
    z_neg = float(logits[1 - positive_index])
    if not (math.isfinite(z_pos) and math.isfinite(z_neg)):
        raise BackendError(f"non-finite logits: {logits!r}")
    top = max(z_pos, z_neg)
    e_pos = math.exp(z_pos - top)
    e_neg = math.exp(z_neg - top)
    return e_pos / (e_pos + e_neg)


class DescriptorSource(Protocol):
    dim: int

    def vector(self, keyframe_id: str) -> np.ndarray: ...


class SimilarityBackend:
    """Interface: score a (query, candidate) keyframe pair in [0, 1]."""

    def pair_similarity(self, query_id: str, candidate_id: str) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class MlpSimilarityBackend(SimilarityBackend):
    def __init__(self, weights: MlpWeights, descriptors: DescriptorSource):
        weights.validate()
        if descriptors.dim != weights.input_dim:
            raise ConfigError(f"descriptor store dimension {descriptors.dim} does not "
                              f"match MLP input dimension {weights.input_dim}")
        self.weights = weights
        self.descriptors = descriptors

    def pair_similarity(self, query_id: str, candidate_id: str) -> float:
        g = descriptor_diff(self.descriptors.vector(query_id),
                            self.descriptors.vector(candidate_id))
        logits = mlp_forward(self.weights, g)
        return softmax_sim(logits, self.weights.positive_class_index)

    def describe(self) -> dict:
        return {"kind": "mlp",
                "input_dim": self.weights.input_dim,
                "layers": len(self.weights.layers),
                "positive_class_index": self.weights.positive_class_index}


class TableSimilarityBackend(SimilarityBackend):
    """Scores looked up from a precomputed table.

    ``missing`` is the value returned for absent pairs, or None to make an
    absent pair an error.
    """

    def __init__(self, scores: Mapping[tuple[str, str], float], symmetric: bool,
                 missing: float | None = None):
        self.symmetric = symmetric
        self.missing = missing
        self._scores: dict[tuple[str, str], float] = {}
        for (a, b), value in scores.items():
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"score for pair ({a!r}, {b!r}) is {value}, "
                                  f"outside [0, 1]")
            self._scores[self._key(a, b)] = float(value)

    def _key(self, a: str, b: str) -> tuple[str, str]:
        if self.symmetric and b < a:
            return (b, a)
        return (a, b)

    def pair_similarity(self, query_id: str, candidate_id: str) -> float:
        key = self._key(query_id, candidate_id)
        if key in self._scores:
            return self._scores[key]
        if self.missing is None:
            raise BackendError(f"no similarity entry for pair "
                               f"({query_id!r}, {candidate_id!r})")
        return self.missing

    def describe(self) -> dict:
        return {"kind": "table", "entries": len(self._scores),
                "symmetric": self.symmetric,
                "missing": "error" if self.missing is None else self.missing}


class OracleSimilarityBackend(SimilarityBackend):
    """Ground-truth-driven synthetic scores.

    Base score is 1 when both keyframes observe the same place, else 0. With
    probability ``flip_probability`` the base is inverted, then Gaussian
    jitter is added and the result clamped to [0, 1]. All randomness is a
    pure function of (seed, unordered pair), so scores are symmetric and
    reproducible, and raising the flip probability flips a superset of the
    pairs flipped at any lower probability.
    """

    def __init__(self, place_of: Mapping[str, int], flip_probability: float = 0.0,
                 jitter_sigma: float = 0.0, seed: int = 0):
        if not 0.0 <= flip_probability <= 1.0:
            raise ConfigError(f"flip probability must be in [0, 1], "
                              f"got {flip_probability}")
        if jitter_sigma < 0.0:
            raise ConfigError(f"jitter sigma must be non-negative, got {jitter_sigma}")
        self.place_of = dict(place_of)
        self.flip_probability = flip_probability
        self.jitter_sigma = jitter_sigma
        self.seed = seed

    def _place(self, keyframe_id: str) -> int:
        try:
            return self.place_of[keyframe_id]
        except KeyError:
            raise UnknownIdError("keyframe", keyframe_id) from None

    def pair_similarity(self, query_id: str, candidate_id: str) -> float:
        same = self._place(query_id) == self._place(candidate_id)
        score = 1.0 if same else 0.0
        rng = pair_rng(self.seed, query_id, candidate_id, domain="sim")
        if rng.random() < self.flip_probability:
            score = 1.0 - score
        if self.jitter_sigma > 0.0:
            score += rng.normal(0.0, self.jitter_sigma)
        return min(1.0, max(0.0, score))

    def describe(self) -> dict:
        return {"kind": "oracle", "flip_probability": self.flip_probability,
                "jitter_sigma": self.jitter_sigma, "seed": self.seed}
