"""Core domain model: keyframes, submaps, and the topological graph.

A node groups the submaps observing one colon region. Edges are undirected
traversability links. The graph tracks the current position and answers the
hop-distance window query used to restrict localization candidates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import GraphError


@dataclass
class Keyframe:
    id: str
    timestamp: float
    descriptor_ref: int = -1  # row in the descriptor store, -1 when unresolved


@dataclass
class Submap:
    id: str
    keyframes: list[Keyframe]
    order_index: int

    def validate(self) -> None:
        if not self.keyframes:
            raise GraphError(f"submap {self.id!r} has no keyframes")
        times = [kf.timestamp for kf in self.keyframes]
        if any(b < a for a, b in zip(times, times[1:])):
            raise GraphError(f"submap {self.id!r} has decreasing keyframe timestamps")

    def keyframe_ids(self) -> list[str]:
        return [kf.id for kf in self.keyframes]


@dataclass
class TopoNode:
    id: int
    # Insertion order equals session order; membership is treated as a set.
    submaps: list[str] = field(default_factory=list)


class TopoGraph:
    """Mutable topological map. Mutation is strictly sequential."""

    def __init__(self):
        self.nodes: list[TopoNode] = []
        self.edges: set[tuple[int, int]] = set()  # stored as (low, high)
        self.current_position: int = -1
        self._owner: dict[str, int] = {}  # submap id -> node id

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> TopoNode:
        if not 0 <= node_id < len(self.nodes):
            raise GraphError(f"node id {node_id} does not exist")
        return self.nodes[node_id]

    def node_of(self, submap_id: str) -> int | None:
        return self._owner.get(submap_id)

    def _add_edge(self, a: int, b: int) -> None:
        if a == b:
            return
        self.edges.add((a, b) if a < b else (b, a))

    def create_node(self, submap_id: str, prev: int | None = None) -> int:
        """New node holding exactly this submap, linked to ``prev``.

        ``prev`` defaults to the current position; it is ignored when the
        graph is empty.
        """
        if submap_id in self._owner:
            raise GraphError(f"submap {submap_id!r} is already assigned to node "
                             f"{self._owner[submap_id]}")
        new_id = len(self.nodes)
        if self.nodes:
            prev = self.current_position if prev is None else prev
            self.node(prev)  # validates
            self.nodes.append(TopoNode(new_id, [submap_id]))
            self._add_edge(prev, new_id)
        else:
            self.nodes.append(TopoNode(new_id, [submap_id]))
        self._owner[submap_id] = new_id
        self.current_position = new_id
        return new_id

    def merge_into_node(self, submap_id: str, target: int,
                        prev: int | None = None) -> None:
        """Add the submap to an existing node and move the cursor there.

        A traversability edge {prev, target} is recorded when they differ:
        observing a known place from elsewhere means the camera moved there.
        """
        if submap_id in self._owner:
            raise GraphError(f"submap {submap_id!r} is already assigned to node "
                             f"{self._owner[submap_id]}")
        node = self.node(target)
        prev = self.current_position if prev is None else prev
        self.node(prev)
        node.submaps.append(submap_id)
        self._owner[submap_id] = target
        if target != prev:
            self._add_edge(prev, target)
        self.current_position = target

    def _adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def hop_distances(self, center: int, max_hops: int | None = None) -> dict[int, int]:
        """BFS hop distance over undirected edges, optionally capped."""
        self.node(center)
        adj = self._adjacency()
        dist = {center: 0}
        queue = deque([center])
        while queue:
            cur = queue.popleft()
            d = dist[cur]
            if max_hops is not None and d >= max_hops:
                continue
            for nxt in adj[cur]:
                if nxt not in dist:
                    dist[nxt] = d + 1
                    queue.append(nxt)
        return dist

    def node_window(self, center: int, radius: int) -> set[int]:
        """All nodes within ``radius`` hops of ``center`` (center included)."""
        if radius < 0:
            raise GraphError(f"window radius must be non-negative, got {radius}")
        return set(self.hop_distances(center, radius))

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        return len(self.hop_distances(0)) == len(self.nodes)

    def submap_count(self) -> int:
        return len(self._owner)

    # JSON-facing structure. Keys are sorted by the writer so the same graph
    # always serializes to the same bytes.
    def to_payload(self) -> dict:
        return {
            "nodes": [{"id": n.id, "submaps": list(n.submaps)} for n in self.nodes],
            "edges": sorted([a, b] for a, b in self.edges),
            "current_position": self.current_position,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TopoGraph":
        graph = cls()
        try:
            nodes = payload["nodes"]
            edges = payload["edges"]
            position = payload["current_position"]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"graph payload missing field: {exc}") from None
        for index, entry in enumerate(nodes):
            if entry["id"] != index:
                raise GraphError(f"node ids must be dense 0..n-1, found {entry['id']} "
                                 f"at position {index}")
            submaps = list(entry["submaps"])
            if not submaps:
                raise GraphError(f"node {index} has no submaps")
            node = TopoNode(index, [])
            graph.nodes.append(node)
            for sid in submaps:
                if sid in graph._owner:
                    raise GraphError(f"submap {sid!r} appears in more than one node")
                node.submaps.append(sid)
                graph._owner[sid] = index
        for pair in edges:
            a, b = int(pair[0]), int(pair[1])
            if a == b:
                raise GraphError(f"self-loop edge on node {a}")
            graph.node(a)
            graph.node(b)
            graph._add_edge(a, b)
        graph.node(position)
        graph.current_position = position
        if not graph.is_connected():
            raise GraphError("graph is not connected")
        return graph
