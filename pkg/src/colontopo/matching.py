"""Geometric verification via pairwise keypoint-match counts.

The engine never runs a matcher itself; it consumes symmetric non-negative
integer counts from a backend (a precomputed table or a synthetic oracle).
A localization is accepted as soon as one sampled pair exceeds the count
threshold, scanning nearest candidate nodes first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BackendError, ConfigError, UnknownIdError
from .graph import Submap, TopoGraph
from .seeding import pair_rng


class CountDistribution:
    """Integer count model: constant, uniform range, or rounded normal."""

    def __init__(self, kind: str, params):
        self.kind = kind
        self.params = params
        if kind == "constant":
            self.params = int(params)
            if self.params < 0:
                raise ConfigError(f"constant count must be non-negative, got {params}")
        elif kind == "uniform":
            lo, hi = int(params[0]), int(params[1])
            if lo < 0 or hi < lo:
                raise ConfigError(f"uniform count range invalid: [{lo}, {hi}]")
            self.params = (lo, hi)
        elif kind == "normal":
            mean, std = float(params[0]), float(params[1])
            if std < 0:
                raise ConfigError(f"normal count std must be non-negative, got {std}")
            self.params = (mean, std)
        else:
            raise ConfigError(f"unknown count distribution kind {kind!r}")

    @classmethod
    def from_spec(cls, spec) -> "CountDistribution":
        """Parse ``{"constant": 150}``-style mappings (or a bare integer)."""
        if isinstance(spec, int):
            return cls("constant", spec)
        if isinstance(spec, Mapping) and len(spec) == 1:
            kind, params = next(iter(spec.items()))
            if kind == "constant":
                return cls("constant", params)
            if kind == "uniform":
                return cls("uniform", (params[0], params[1]))
            if kind == "normal":
                return cls("normal", (params["mean"], params["std"]))
        raise ConfigError(f"cannot parse count distribution spec: {spec!r}")

    def to_spec(self):
        if self.kind == "constant":
            return {"constant": self.params}
        if self.kind == "uniform":
            return {"uniform": list(self.params)}
        return {"normal": {"mean": self.params[0], "std": self.params[1]}}

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == "constant":
            return self.params
        if self.kind == "uniform":
            lo, hi = self.params
            return int(rng.integers(lo, hi + 1))
        mean, std = self.params
        return max(0, int(round(rng.normal(mean, std))))


class MatchBackend:
    """Interface: symmetric non-negative match count for a keyframe pair."""

    def match_count(self, a: str, b: str) -> int:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class TableMatchBackend(MatchBackend):
    def __init__(self, counts: Mapping[tuple[str, str], int],
                 missing: int | None = None):
        self.missing = missing
        self._counts: dict[tuple[str, str], int] = {}
        for (a, b), value in counts.items():
            if value < 0:
                raise ConfigError(f"match count for ({a!r}, {b!r}) is negative")
            self._counts[self._key(a, b)] = int(value)

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def match_count(self, a: str, b: str) -> int:
        key = self._key(a, b)
        if key in self._counts:
            return self._counts[key]
        if self.missing is None:
            raise BackendError(f"no match-count entry for pair ({a!r}, {b!r})")
        return self.missing

    def describe(self) -> dict:
        return {"kind": "table", "entries": len(self._counts),
                "missing": "error" if self.missing is None else self.missing}


class OracleMatchBackend(MatchBackend):
    """Counts drawn from a same-place or different-place distribution,
    seeded per unordered pair so results are symmetric and reproducible."""

    def __init__(self, place_of: Mapping[str, int],
                 same_place: CountDistribution,
                 different_place: CountDistribution, seed: int = 0):
        self.place_of = dict(place_of)
        self.same_place = same_place
        self.different_place = different_place
        self.seed = seed

    def _place(self, keyframe_id: str) -> int:
        try:
            return self.place_of[keyframe_id]
        except KeyError:
            raise UnknownIdError("keyframe", keyframe_id) from None

    def match_count(self, a: str, b: str) -> int:
        same = self._place(a) == self._place(b)
        dist = self.same_place if same else self.different_place
        return dist.sample(pair_rng(self.seed, a, b, domain="match"))

    def describe(self) -> dict:
        return {"kind": "oracle", "same_place": self.same_place.to_spec(),
                "different_place": self.different_place.to_spec(),
                "seed": self.seed}


def sample_triplet(submap: Submap) -> list[str]:
    """First, middle and last keyframe ids, deduplicated preserving order."""
    n = len(submap.keyframes)
    if n == 0:
        raise BackendError(f"submap {submap.id!r} has no keyframes")
    indices = [0, (n - 1) // 2, n - 1]
    out: list[str] = []
    for i in indices:
        kf_id = submap.keyframes[i].id
        if kf_id not in out:
            out.append(kf_id)
    return out


@dataclass
class MatchSearchResult:
    node_id: int | None          # first node with a qualifying pair, or None
    hit_count: int | None        # the count that fired
    best_count: int | None       # highest count seen across all comparisons
    pairs_compared: int
    nodes_scanned: int


def geometric_localization(query: Submap, candidates: Sequence[int],
                           graph: TopoGraph, submaps_by_id: Mapping[str, Submap],
                           backend: MatchBackend,
                           threshold: int) -> MatchSearchResult:
    """Scan candidate nodes in the given order, comparing first/middle/last
    keyframes of the query against those of every node submap. Stops at the
    first pair with count strictly above the threshold."""
    query_triplet = sample_triplet(query)
    best: int | None = None
    pairs = 0
    scanned = 0
    for node_id in candidates:
        scanned += 1
        for submap_id in graph.node(node_id).submaps:
            candidate_triplet = sample_triplet(submaps_by_id[submap_id])
            for qa in query_triplet:
                for cb in candidate_triplet:
                    count = backend.match_count(qa, cb)
                    pairs += 1
                    if best is None or count > best:
                        best = count
                    if count > threshold:
                        return MatchSearchResult(node_id, count, best, pairs, scanned)
    return MatchSearchResult(None, None, best, pairs, scanned)
