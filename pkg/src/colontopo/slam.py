"""Sequential topological mapping loop.

Each incoming submap is either merged into an existing node or starts a new
one. Two triggers can accept a localization, checked in this order:

1. geometric: any sampled keyframe pair against a candidate node exceeds the
   match-count threshold (strict), nearest candidates scanned first;
2. retrieval: per query keyframe, the best-scoring candidate node is
   recorded; the node with the most votes wins if the median of its recorded
   scores strictly exceeds the retrieval threshold.

With the topological prior enabled, candidates are restricted to nodes
within ``window_radius`` hops of the current position.
"""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field, asdict
from typing import Mapping, Sequence

from .errors import ConfigError, PipelineError
from .graph import Submap, TopoGraph
from .matching import MatchBackend, geometric_localization
from .similarity import SimilarityBackend


@dataclass
class SlamConfig:
    window_radius: int = 5            # prior window, in node hops
    retrieval_threshold: float = 0.95  # strict lower bound for the retrieval score
    match_threshold: int = 100         # strict lower bound for match counts
    prior_enabled: bool = True
    matcher_enabled: bool = True
    retrieval_enabled: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.retrieval_threshold <= 1.0:
            raise ConfigError(f"retrieval threshold must be in [0, 1], "
                              f"got {self.retrieval_threshold}")
        if self.window_radius < 0:
            raise ConfigError(f"window radius must be non-negative, "
                              f"got {self.window_radius}")
        if self.match_threshold < 0:
            raise ConfigError(f"match threshold must be non-negative, "
                              f"got {self.match_threshold}")
        if not (self.matcher_enabled or self.retrieval_enabled):
            raise ConfigError("at least one of matcher/retrieval must be enabled")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SlamConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown slam config keys: {sorted(unknown)}")
        cfg = cls(**dict(data))
        cfg.validate()
        return cfg

    def replace(self, **overrides) -> "SlamConfig":
        data = self.to_dict()
        data.update(overrides)
        return SlamConfig.from_dict(data)


@dataclass
class LocalizationDecision:
    submap_id: str
    outcome: str                      # "merged" | "new_node"
    node_id: int                      # node merged into, or the new node
    trigger: str                      # "geometric" | "retrieval" | "none"
    retrieval_score: float | None = None
    best_match_count: int | None = None
    candidate_node: int | None = None
    window_size: int = 0
    total_nodes: int = 0
    sim_calls: int = 0
    match_calls: int = 0
    nodes_scanned_matcher: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "LocalizationDecision":
        return cls(**dict(data))


class _CountingSimilarity(SimilarityBackend):
    def __init__(self, inner: SimilarityBackend):
        self.inner = inner
        self.calls = 0

    def pair_similarity(self, query_id: str, candidate_id: str) -> float:
        self.calls += 1
        return self.inner.pair_similarity(query_id, candidate_id)


class _CountingMatcher(MatchBackend):
    def __init__(self, inner: MatchBackend):
        self.inner = inner
        self.calls = 0

    def match_count(self, a: str, b: str) -> int:
        self.calls += 1
        return self.inner.match_count(a, b)


def submap_score(query_kf_id: str, candidate: Submap,
                 backend: SimilarityBackend) -> float:
    """Mean of the top-3 pair similarities against the candidate's keyframes
    (all of them when it has fewer than 3)."""
    scores = sorted(
        (backend.pair_similarity(query_kf_id, kf.id) for kf in candidate.keyframes),
        reverse=True,
    )
    top = scores[:3]
    return sum(top) / len(top)


def node_score(query_kf_id: str, node_submaps: Sequence[str],
               submaps_by_id: Mapping[str, Submap],
               backend: SimilarityBackend) -> float:
    """Highest submap score within the node."""
    if not node_submaps:
        raise PipelineError("node has no submaps")
    return max(submap_score(query_kf_id, submaps_by_id[sid], backend)
               for sid in node_submaps)


def retrieval_localization(query: Submap, candidates: Sequence[int],
                           distances: Mapping[int, int], graph: TopoGraph,
                           submaps_by_id: Mapping[str, Submap],
                           backend: SimilarityBackend,
                           ) -> tuple[int, float] | None:
    """Vote over keyframes for the best candidate node.

    Per query keyframe the best-scoring node is recorded (ties to the lower
    node id). The node with the most votes wins; vote ties break on higher
    median score, then smaller hop distance, then lower id. Returns that
    node with the median of its recorded scores, or None when there are no
    candidates.
    """
    if not candidates:
        return None
    ordered = sorted(candidates)
    votes: list[tuple[int, float]] = []
    for kf in query.keyframes:
        best_node = -1
        best = -1.0
        for node_id in ordered:
            score = node_score(kf.id, graph.node(node_id).submaps,
                               submaps_by_id, backend)
            if score > best:
                best = score
                best_node = node_id
        votes.append((best_node, best))

    occurrences = Counter(node_id for node_id, _ in votes)
    top_count = max(occurrences.values())
    tied = [node_id for node_id, count in occurrences.items() if count == top_count]
    medians = {
        node_id: statistics.median(s for n, s in votes if n == node_id)
        for node_id in tied
    }
    winner = min(tied, key=lambda n: (-medians[n], distances.get(n, 0), n))
    return winner, medians[winner]


def candidate_order(graph: TopoGraph, center: int,
                    radius: int | None) -> tuple[list[int], dict[int, int]]:
    """Candidate node ids sorted by (hop distance, id), plus the distances.

    ``radius=None`` means no prior: every node is a candidate, still ordered
    by distance from the cursor.
    """
    distances = graph.hop_distances(center, radius)
    ordered = sorted(distances, key=lambda n: (distances[n], n))
    return ordered, distances


def decide(query: Submap, graph: TopoGraph, submaps_by_id: Mapping[str, Submap],
           cfg: SlamConfig, sim_backend: SimilarityBackend | None,
           match_backend: MatchBackend | None) -> LocalizationDecision:
    """Process one submap against a non-empty graph, mutating it."""
    if len(graph) == 0:
        raise PipelineError("decide() requires a non-empty graph")
    prev = graph.current_position
    radius = cfg.window_radius if cfg.prior_enabled else None
    candidates, distances = candidate_order(graph, prev, radius)
    window_size = len(candidates)
    total_nodes = len(graph)

    sim_counter = _CountingSimilarity(sim_backend) if sim_backend else None
    match_counter = _CountingMatcher(match_backend) if match_backend else None

    trigger = "none"
    target: int | None = None
    retrieval_score: float | None = None
    best_match_count: int | None = None
    candidate_node: int | None = None
    nodes_scanned = 0

    if cfg.matcher_enabled:
        if match_counter is None:
            raise ConfigError("matcher is enabled but no match backend was provided")
        result = geometric_localization(query, candidates, graph, submaps_by_id,
                                        match_counter, cfg.match_threshold)
        best_match_count = result.best_count
        nodes_scanned = result.nodes_scanned
        if result.node_id is not None:
            trigger = "geometric"
            target = result.node_id
            candidate_node = result.node_id

    if target is None and cfg.retrieval_enabled:
        if sim_counter is None:
            raise ConfigError("retrieval is enabled but no similarity backend "
                              "was provided")
        retrieved = retrieval_localization(query, candidates, distances, graph,
                                           submaps_by_id, sim_counter)
        if retrieved is not None:
            candidate_node, retrieval_score = retrieved
            if retrieval_score > cfg.retrieval_threshold:
                trigger = "retrieval"
                target = candidate_node

    if target is not None:
        graph.merge_into_node(query.id, target, prev)
        outcome, node_id = "merged", target
    else:
        node_id = graph.create_node(query.id, prev)
        outcome = "new_node"

    return LocalizationDecision(
        submap_id=query.id,
        outcome=outcome,
        node_id=node_id,
        trigger=trigger,
        retrieval_score=retrieval_score,
        best_match_count=best_match_count,
        candidate_node=candidate_node,
        window_size=window_size,
        total_nodes=total_nodes,
        sim_calls=sim_counter.calls if sim_counter else 0,
        match_calls=match_counter.calls if match_counter else 0,
        nodes_scanned_matcher=nodes_scanned,
    )


def run_session(submaps: Sequence[Submap], cfg: SlamConfig,
                sim_backend: SimilarityBackend | None,
                match_backend: MatchBackend | None,
                ) -> tuple[TopoGraph, list[LocalizationDecision]]:
    """Feed a session through the loop in order. The first submap creates
    node 0 and is logged as a new-node decision so the log has one entry per
    submap."""
    cfg.validate()
    if not submaps:
        raise PipelineError("session has no submaps")
    seen: set[str] = set()
    last_order = None
    for sm in submaps:
        sm.validate()
        if sm.id in seen:
            raise PipelineError(f"duplicate submap id {sm.id!r} in session")
        seen.add(sm.id)
        if last_order is not None and sm.order_index <= last_order:
            raise PipelineError(f"submap {sm.id!r} breaks the session order")
        last_order = sm.order_index

    submaps_by_id = {sm.id: sm for sm in submaps}
    graph = TopoGraph()
    decisions: list[LocalizationDecision] = []

    first = submaps[0]
    node_id = graph.create_node(first.id)
    decisions.append(LocalizationDecision(
        submap_id=first.id, outcome="new_node", node_id=node_id, trigger="none",
    ))
    for sm in submaps[1:]:
        try:
            decisions.append(decide(sm, graph, submaps_by_id, cfg,
                                    sim_backend, match_backend))
        except PipelineError as exc:
            raise PipelineError(f"while processing submap {sm.id!r}: {exc}") from exc
    return graph, decisions
