"""Shared construction helpers for the test suite."""

from __future__ import annotations

import numpy as np

from colontopo.graph import Keyframe, Submap, TopoGraph
from colontopo.similarity import MlpLayer, MlpWeights, TableSimilarityBackend


def make_submap(sid: str, n_keyframes: int, order_index: int,
                t0: float = 0.0) -> Submap:
    keyframes = [Keyframe(id=f"{sid}_k{j:02d}", timestamp=t0 + 0.3 * j)
                 for j in range(n_keyframes)]
    return Submap(id=sid, keyframes=keyframes, order_index=order_index)


def chain_graph(n: int, prefix: str = "s") -> TopoGraph:
    """Graph 0-1-...-(n-1), one single-submap node per link."""
    graph = TopoGraph()
    for i in range(n):
        graph.create_node(f"{prefix}{i}")
    return graph


def score_table(entries: dict[tuple[str, str], float],
                symmetric: bool = True,
                missing: float | None = 0.0) -> TableSimilarityBackend:
    return TableSimilarityBackend(entries, symmetric=symmetric, missing=missing)


def random_mlp(rng: np.random.Generator, input_dim: int, hidden: list[int],
               scale: float = 0.8) -> MlpWeights:
    """Random little MLP ending in 2 logits, mixed activations."""
    dims = [input_dim] + hidden + [2]
    layers = []
    for i in range(len(dims) - 1):
        activation = "relu" if (i < len(dims) - 2 and rng.random() < 0.7) else "none"
        layers.append(MlpLayer(
            weights=rng.normal(0.0, scale, size=(dims[i + 1], dims[i])),
            bias=rng.normal(0.0, scale, size=dims[i + 1]),
            activation=activation,
        ))
    return MlpWeights(layers=layers, input_dim=input_dim)
