"""Precision/recall evaluation against manual covisibility labels.

A merge is a true positive when a strict majority of the target node's
submaps (as composed before the merge) are labelled covisible with the new
submap. A new-node decision is a false negative when some existing node had
such a majority, i.e. the submap should have been localized.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import PipelineError, UnknownIdError
from .graph import Submap
from .matching import MatchBackend
from .similarity import SimilarityBackend
from .slam import LocalizationDecision, SlamConfig, run_session


class GroundTruth:
    """Symmetric covisibility relation over submap ids.

    Self-covisibility is implied, never stored. When an id universe is
    given, lookups outside it are errors rather than silently negative.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]],
                 known_ids: Iterable[str] | None = None):
        self.known_ids = set(known_ids) if known_ids is not None else None
        self._pairs: set[tuple[str, str]] = set()
        for a, b in pairs:
            if a == b:
                raise PipelineError(f"self-covisibility pair for {a!r} is implied, "
                                    f"not stored")
            self._check_id(a)
            self._check_id(b)
            self._pairs.add((a, b) if a < b else (b, a))

    def _check_id(self, submap_id: str) -> None:
        if self.known_ids is not None and submap_id not in self.known_ids:
            raise UnknownIdError("submap", submap_id)

    def covisible(self, a: str, b: str) -> bool:
        self._check_id(a)
        self._check_id(b)
        if a == b:
            return True
        return ((a, b) if a < b else (b, a)) in self._pairs

    def pairs(self) -> set[tuple[str, str]]:
        return set(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)


@dataclass
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def add(self, label: str) -> None:
        setattr(self, label.lower(), getattr(self, label.lower()) + 1)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _has_covisible_majority(submap_id: str, members: Sequence[str],
                            gt: GroundTruth) -> bool:
    positives = sum(1 for m in members if gt.covisible(submap_id, m))
    return 2 * positives > len(members)


def classify_decision(decision: LocalizationDecision,
                      nodes_before: Mapping[int, Sequence[str]],
                      gt: GroundTruth) -> str:
    """Label one decision TP/FP/FN/TN against the pre-decision node contents."""
    if decision.outcome == "merged":
        members = nodes_before.get(decision.node_id)
        if not members:
            raise PipelineError(f"decision for {decision.submap_id!r} merged into "
                                f"node {decision.node_id} which did not exist")
        if _has_covisible_majority(decision.submap_id, members, gt):
            return "TP"
        return "FP"
    # New node: should it have been localized somewhere?
    for members in nodes_before.values():
        if _has_covisible_majority(decision.submap_id, members, gt):
            return "FN"
    return "TN"


def classify_session(decisions: Sequence[LocalizationDecision],
                     gt: GroundTruth) -> tuple[EvalCounts, list[str | None]]:
    """Replay a decision log, labelling every decision except the first.

    Node contents are rebuilt incrementally from the log itself, so each
    decision is judged against the graph as it stood at that moment.
    """
    counts = EvalCounts()
    labels: list[str | None] = []
    nodes: dict[int, list[str]] = {}
    for index, decision in enumerate(decisions):
        if index == 0:
            if decision.outcome != "new_node":
                raise PipelineError("first decision must create the first node")
            labels.append(None)
        else:
            label = classify_decision(decision, nodes, gt)
            counts.add(label)
            labels.append(label)
        if decision.outcome == "merged":
            nodes[decision.node_id].append(decision.submap_id)
        else:
            if decision.node_id in nodes:
                raise PipelineError(f"decision log creates node {decision.node_id} "
                                    f"twice")
            nodes[decision.node_id] = [decision.submap_id]
    return counts, labels


def precision_recall(counts: EvalCounts) -> tuple[float | None, float | None]:
    """Eq.-style precision and recall; None when the denominator is zero."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else None
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else None
    return precision, recall


@dataclass
class VariantResult:
    name: str
    config: SlamConfig
    counts: EvalCounts
    precision: float | None
    recall: float | None
    decisions: list[LocalizationDecision]
    labels: list[str | None]
    sim_calls: int
    match_calls: int
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": self.config.to_dict(),
            "counts": self.counts.to_dict(),
            "precision": self.precision,
            "recall": self.recall,
            "sim_calls": self.sim_calls,
            "match_calls": self.match_calls,
            "wall_time_s": self.wall_time_s,
            "decisions": [d.to_dict() for d in self.decisions],
            "labels": self.labels,
        }


def evaluate_session(submaps: Sequence[Submap], gt: GroundTruth,
                     variants: Sequence[tuple[str, SlamConfig]],
                     sim_backend: SimilarityBackend | None,
                     match_backend: MatchBackend | None) -> list[VariantResult]:
    """Run every config variant over the session and score it."""
    results: list[VariantResult] = []
    for name, cfg in variants:
        started = time.perf_counter()
        _, decisions = run_session(submaps, cfg, sim_backend, match_backend)
        wall = time.perf_counter() - started
        counts, labels = classify_session(decisions, gt)
        precision, recall = precision_recall(counts)
        results.append(VariantResult(
            name=name,
            config=cfg,
            counts=counts,
            precision=precision,
            recall=recall,
            decisions=decisions,
            labels=labels,
            sim_calls=sum(d.sim_calls for d in decisions),
            match_calls=sum(d.match_calls for d in decisions),
            wall_time_s=wall,
        ))
    return results


def ablation_variants(base: SlamConfig) -> list[tuple[str, SlamConfig]]:
    """The standard three-row ablation: retrieval alone, plus the prior,
    plus the matcher."""
    return [
        ("retrieval", base.replace(prior_enabled=False, matcher_enabled=False,
                                   retrieval_enabled=True)),
        ("retrieval+prior", base.replace(prior_enabled=True, matcher_enabled=False,
                                         retrieval_enabled=True)),
        ("retrieval+prior+matcher", base.replace(prior_enabled=True,
                                                 matcher_enabled=True,
                                                 retrieval_enabled=True)),
    ]
