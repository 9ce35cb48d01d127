"""Synthetic colon sessions with ground truth.

Worlds are linear sequences of places traversed contiguously: an entry pass
to the far end, then a withdrawal pass with optional dwells and back-and-
forth excursions. Every traversal step emits one submap; two submaps are
covisible exactly when they observe the same place. The module also ships
an independent brute-force predictor of the ideal decision sequence, used
as the equivalence oracle for the mapping loop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .evaluation import GroundTruth
from .graph import Keyframe, Submap
from .ingestion import SessionManifest
from .matching import CountDistribution, OracleMatchBackend
from .similarity import OracleSimilarityBackend
from .slam import SlamConfig


@dataclass
class WorldConfig:
    num_places: int = 8
    traversal: list[int] | None = None  # explicit place sequence, overrides generation
    revisit_probability: float = 0.3    # chance of an upstream excursion per step
    max_back_jump: int = 3              # deepest excursion, in places
    dwell_probability: float = 0.1      # chance of re-observing the current place
    keyframes_per_submap: tuple[int, int] = (8, 16)
    flip_probability: float = 0.0
    jitter_sigma: float = 0.0
    same_place_counts: CountDistribution = field(
        default_factory=lambda: CountDistribution("constant", 150))
    different_place_counts: CountDistribution = field(
        default_factory=lambda: CountDistribution("constant", 5))
    seed: int = 0
    descriptor_dim: int = 768

    def validate(self) -> None:
        if self.num_places < 1:
            raise ConfigError(f"need at least one place, got {self.num_places}")
        for name, p in (("revisit_probability", self.revisit_probability),
                        ("dwell_probability", self.dwell_probability),
                        ("flip_probability", self.flip_probability)):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.max_back_jump < 0:
            raise ConfigError("max_back_jump must be non-negative")
        lo, hi = self.keyframes_per_submap
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad keyframes_per_submap range: ({lo}, {hi})")
        if self.jitter_sigma < 0:
            raise ConfigError("jitter_sigma must be non-negative")


@dataclass
class World:
    config: WorldConfig
    traversal: list[int]
    manifest: SessionManifest
    ground_truth: GroundTruth
    place_of_submap: dict[str, int]
    place_of_keyframe: dict[str, int]

    def num_distinct_places(self) -> int:
        return len(set(self.traversal))


def _validate_contiguous(traversal: list[int], num_places: int) -> None:
    if not traversal:
        raise ConfigError("traversal is empty")
    for place in traversal:
        if not 0 <= place < num_places:
            raise ConfigError(f"traversal place {place} outside 0..{num_places - 1}")
    for i, (a, b) in enumerate(zip(traversal, traversal[1:])):
        if abs(b - a) > 1:
            raise ConfigError(f"traversal step {i} jumps from place {a} to {b}; "
                              f"camera motion must be contiguous")


def build_traversal(cfg: WorldConfig, rng: np.random.Generator) -> list[int]:
    """Entry pass 0..P-1, then withdrawal back to 0 with dwells and bounded
    upstream excursions."""
    path = list(range(cfg.num_places))
    position = cfg.num_places - 1
    while position > 0:
        if cfg.dwell_probability > 0 and rng.random() < cfg.dwell_probability:
            path.append(position)
            continue
        if (cfg.max_back_jump > 0 and cfg.revisit_probability > 0
                and position < cfg.num_places - 1
                and rng.random() < cfg.revisit_probability):
            depth = int(rng.integers(1, cfg.max_back_jump + 1))
            top = min(cfg.num_places - 1, position + depth)
            for p in range(position + 1, top + 1):
                path.append(p)
            for p in range(top - 1, position - 1, -1):
                path.append(p)
            continue
        position -= 1
        path.append(position)
    return path


def generate_world(cfg: WorldConfig) -> World:
    """Deterministic world for a config and seed."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    if cfg.traversal is not None:
        traversal = list(cfg.traversal)
    else:
        traversal = build_traversal(cfg, rng)
    _validate_contiguous(traversal, cfg.num_places)

    submaps: list[Submap] = []
    place_of_submap: dict[str, int] = {}
    place_of_keyframe: dict[str, int] = {}
    t = 0.0
    lo, hi = cfg.keyframes_per_submap
    for index, place in enumerate(traversal):
        sid = f"s{index:03d}"
        n_kf = int(rng.integers(lo, hi + 1))
        keyframes = []
        for j in range(n_kf):
            keyframes.append(Keyframe(id=f"{sid}_k{j:02d}", timestamp=round(t, 3)))
            t += float(rng.uniform(0.2, 0.4))
        t += 1.0  # gap between submaps
        submaps.append(Submap(id=sid, keyframes=keyframes, order_index=index))
        place_of_submap[sid] = place
        for kf in keyframes:
            place_of_keyframe[kf.id] = place

    pairs = [
        (a.id, b.id)
        for i, a in enumerate(submaps)
        for b in submaps[i + 1:]
        if place_of_submap[a.id] == place_of_submap[b.id]
    ]
    manifest = SessionManifest(session_id=f"synthetic-{cfg.seed}",
                               descriptor_dim=cfg.descriptor_dim,
                               submaps=submaps)
    gt = GroundTruth(pairs, known_ids=[sm.id for sm in submaps])
    return World(config=cfg, traversal=traversal, manifest=manifest,
                 ground_truth=gt, place_of_submap=place_of_submap,
                 place_of_keyframe=place_of_keyframe)


def oracle_backends(world: World) -> tuple[OracleSimilarityBackend, OracleMatchBackend]:
    cfg = world.config
    sim = OracleSimilarityBackend(world.place_of_keyframe,
                                  flip_probability=cfg.flip_probability,
                                  jitter_sigma=cfg.jitter_sigma,
                                  seed=cfg.seed)
    match = OracleMatchBackend(world.place_of_keyframe,
                               same_place=cfg.same_place_counts,
                               different_place=cfg.different_place_counts,
                               seed=cfg.seed)
    return sim, match


def oracle_spec_payload(world: World) -> dict:
    """The on-disk oracle description consumed by the backend loader."""
    cfg = world.config
    return {
        "seed": cfg.seed,
        "places": dict(sorted(world.place_of_submap.items())),
        "similarity": {
            "flip_probability": cfg.flip_probability,
            "jitter_sigma": cfg.jitter_sigma,
        },
        "matching": {
            "same_place": cfg.same_place_counts.to_spec(),
            "different_place": cfg.different_place_counts.to_spec(),
        },
    }


def write_world(world: World, out_dir, emit_tables: bool = False) -> dict[str, str]:
    """Materialize a world in the exact formats the loaders consume.

    Writes the session manifest, the ground-truth pair list, the oracle spec
    and a ready-to-run config pointing at it. With ``emit_tables`` the
    oracle is also flattened into score/count tables over every keyframe
    pair (quadratic; intended for small worlds) and the config uses those
    instead.
    """
    import yaml

    from . import ingestion

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "manifest": out / "manifest.yaml",
        "ground_truth": out / "groundtruth.csv",
        "oracle": out / "oracle.yaml",
        "config": out / "config.yaml",
    }
    ingestion.write_manifest(paths["manifest"], world.manifest)
    ingestion.write_ground_truth(paths["ground_truth"], world.ground_truth.pairs())
    paths["oracle"].write_text(
        yaml.safe_dump(oracle_spec_payload(world), sort_keys=True), encoding="utf-8")

    backends = {
        "similarity": {"kind": "oracle", "spec": "oracle.yaml"},
        "matcher": {"kind": "oracle", "spec": "oracle.yaml"},
    }
    if emit_tables:
        sim, match = oracle_backends(world)
        kf_ids = world.manifest.keyframe_ids()
        scores: dict[tuple[str, str], float] = {}
        counts: dict[tuple[str, str], int] = {}
        for i, a in enumerate(kf_ids):
            for b in kf_ids[i + 1:]:
                scores[(a, b)] = sim.pair_similarity(a, b)
                counts[(a, b)] = match.match_count(a, b)
        paths["scores"] = out / "scores.csv"
        paths["counts"] = out / "counts.csv"
        ingestion.write_score_table(paths["scores"], scores, symmetric=True)
        ingestion.write_count_table(paths["counts"], counts)
        backends = {
            "similarity": {"kind": "table", "path": "scores.csv",
                           "missing": "default", "default": 0.0},
            "matcher": {"kind": "table", "path": "counts.csv",
                        "missing": "default", "default": 0},
        }
    ingestion.write_config(paths["config"], SlamConfig(), backends)
    return {name: str(p) for name, p in paths.items()}


@dataclass
class ExpectedDecision:
    outcome: str  # "merged" | "new_node"
    node_id: int


def _bfs_within(edges: set[tuple[int, int]], num_nodes: int, start: int,
                radius: int | None) -> dict[int, int]:
    adjacency: dict[int, list[int]] = {i: [] for i in range(num_nodes)}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if radius is not None and dist[cur] >= radius:
            continue
        for nxt in adjacency[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def expected_decisions(world: World, cfg: SlamConfig) -> list[ExpectedDecision]:
    """Brute-force ideal decision sequence, straight from place identities.

    Valid for zero-noise oracle backends with thresholds separating the two
    count distributions. Kept deliberately separate from the mapping loop:
    it tracks its own node list, edge set and cursor.
    """
    out: list[ExpectedDecision] = []
    node_place: list[int] = []
    edges: set[tuple[int, int]] = set()
    cursor = 0
    for step, place in enumerate(world.traversal):
        if step == 0:
            node_place.append(place)
            out.append(ExpectedDecision("new_node", 0))
            continue
        radius = cfg.window_radius if cfg.prior_enabled else None
        reach = _bfs_within(edges, len(node_place), cursor, radius)
        if cfg.matcher_enabled:
            order = sorted(reach, key=lambda n: (reach[n], n))
        else:
            order = sorted(reach)
        target = next((n for n in order if node_place[n] == place), None)
        if target is None:
            new_id = len(node_place)
            node_place.append(place)
            edges.add((cursor, new_id) if cursor < new_id else (new_id, cursor))
            out.append(ExpectedDecision("new_node", new_id))
            cursor = new_id
        else:
            if target != cursor:
                edges.add((cursor, target) if cursor < target else (target, cursor))
            out.append(ExpectedDecision("merged", target))
            cursor = target
    return out
