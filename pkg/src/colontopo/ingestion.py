"""On-disk formats: session manifests, descriptor stores, score and count
tables, classifier weights, ground truth, configs, graphs and decision logs.

Metadata formats are text (YAML or delimited lines) so they diff cleanly;
descriptors are packed binary because they are large. All loaders turn
malformed input into FormatError with location context, never a crash.

Descriptor container layout (little-endian):
    bytes 0..3    magic "CSLD"
    bytes 4..7    format version (uint32, currently 1)
    bytes 8..11   vector count (uint32)
    bytes 12..15  vector dimension (uint32)
    bytes 16..    count * dim float32 values, row-major
plus a sidecar index at <path>.idx with one "keyframe_id,row" line per
vector, ordered by row.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import (ColontopoError, ConfigError, FormatError, GraphError,
                     UnknownIdError)
from .graph import Keyframe, Submap, TopoGraph
from .matching import (CountDistribution, MatchBackend, OracleMatchBackend,
                       TableMatchBackend)
from .similarity import (ACTIVATIONS, MlpLayer, MlpSimilarityBackend, MlpWeights,
                         OracleSimilarityBackend, SimilarityBackend,
                         TableSimilarityBackend)
from .slam import LocalizationDecision, SlamConfig

DESCRIPTOR_MAGIC = b"CSLD"
DESCRIPTOR_VERSION = 1
WEIGHTS_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# session manifest

@dataclass
class SessionManifest:
    session_id: str
    descriptor_dim: int
    submaps: list[Submap]

    def submaps_by_id(self) -> dict[str, Submap]:
        return {sm.id: sm for sm in self.submaps}

    def keyframe_ids(self) -> list[str]:
        return [kf.id for sm in self.submaps for kf in sm.keyframes]

    def validate(self) -> None:
        if self.descriptor_dim <= 0:
            raise ConfigError(f"descriptor dimension must be positive, "
                              f"got {self.descriptor_dim}")
        if not self.submaps:
            raise ConfigError("session has no submaps")
        seen_submaps: set[str] = set()
        seen_keyframes: set[str] = set()
        for index, sm in enumerate(self.submaps):
            if sm.id in seen_submaps:
                raise ConfigError(f"duplicate submap id {sm.id!r}")
            seen_submaps.add(sm.id)
            if sm.order_index != index:
                raise ConfigError(f"submap {sm.id!r} has order index "
                                  f"{sm.order_index}, expected {index}")
            if not sm.keyframes:
                raise ConfigError(f"submap {sm.id!r} has no keyframes")
            previous = None
            for kf in sm.keyframes:
                if kf.id in seen_keyframes:
                    raise ConfigError(f"duplicate keyframe id {kf.id!r}")
                seen_keyframes.add(kf.id)
                if previous is not None and kf.timestamp < previous:
                    raise ConfigError(f"keyframe {kf.id!r} timestamp decreases "
                                      f"within submap {sm.id!r}")
                previous = kf.timestamp


def load_session(path) -> SessionManifest:
    path = Path(path)
    data = _load_yaml(path)
    if not isinstance(data, dict):
        raise FormatError(path, "manifest root must be a mapping")
    try:
        session_id = str(data["session_id"])
        dim = data["descriptor_dim"]
        submap_entries = data["submaps"]
    except KeyError as exc:
        raise FormatError(path, f"manifest missing field {exc}") from None
    if not isinstance(dim, int):
        raise FormatError(path, f"descriptor_dim must be an integer, got {dim!r}")
    if not isinstance(submap_entries, list):
        raise FormatError(path, "submaps must be a list")
    submaps: list[Submap] = []
    for index, entry in enumerate(submap_entries):
        try:
            sid = str(entry["id"])
            kf_entries = entry["keyframes"]
        except (KeyError, TypeError) as exc:
            raise FormatError(path, f"submap record {index} missing field: {exc}")
        if not isinstance(kf_entries, list) or not kf_entries:
            raise FormatError(path, f"submap {sid!r} has an empty keyframe list")
        keyframes = []
        for kf_entry in kf_entries:
            try:
                keyframes.append(Keyframe(id=str(kf_entry["id"]),
                                          timestamp=float(kf_entry["timestamp"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(path, f"bad keyframe record in submap {sid!r}: "
                                        f"{exc}")
        submaps.append(Submap(id=sid, keyframes=keyframes, order_index=index))
    manifest = SessionManifest(session_id=session_id, descriptor_dim=dim,
                               submaps=submaps)
    try:
        manifest.validate()
    except ConfigError as exc:
        raise FormatError(path, str(exc)) from None
    return manifest


def write_manifest(path, manifest: SessionManifest) -> None:
    payload = {
        "session_id": manifest.session_id,
        "descriptor_dim": manifest.descriptor_dim,
        "submaps": [
            {
                "id": sm.id,
                "keyframes": [{"id": kf.id, "timestamp": kf.timestamp}
                              for kf in sm.keyframes],
            }
            for sm in manifest.submaps
        ],
    }
    Path(path).write_text(yaml.safe_dump(payload, sort_keys=False), encoding="utf-8")


# ---------------------------------------------------------------------------
# descriptor store

class DescriptorStore:
    def __init__(self, dim: int, ids: list[str], matrix: np.ndarray):
        if matrix.shape != (len(ids), dim):
            raise ConfigError(f"descriptor matrix shape {matrix.shape} does not "
                              f"match {len(ids)} ids x dim {dim}")
        self.dim = dim
        self.ids = list(ids)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self._row_of = {kf_id: row for row, kf_id in enumerate(self.ids)}
        if len(self._row_of) != len(self.ids):
            raise ConfigError("duplicate keyframe ids in descriptor store")

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, keyframe_id: str) -> bool:
        return keyframe_id in self._row_of

    def vector(self, keyframe_id: str) -> np.ndarray:
        try:
            return self.matrix[self._row_of[keyframe_id]]
        except KeyError:
            raise UnknownIdError("keyframe", keyframe_id) from None


def write_descriptors(path, store: DescriptorStore) -> None:
    path = Path(path)
    header = DESCRIPTOR_MAGIC + struct.pack("<III", DESCRIPTOR_VERSION,
                                            len(store.ids), store.dim)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(store.matrix.astype("<f4", copy=False).tobytes())
    index_lines = [f"{kf_id},{row}" for row, kf_id in enumerate(store.ids)]
    Path(str(path) + ".idx").write_text("\n".join(index_lines) + "\n",
                                        encoding="utf-8")


def load_descriptors(path, manifest: SessionManifest | None = None) -> DescriptorStore:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 16:
        raise FormatError(path, f"file too short for header ({len(raw)} bytes)",
                          offset=len(raw))
    if raw[:4] != DESCRIPTOR_MAGIC:
        raise FormatError(path, f"bad magic {raw[:4]!r}, expected "
                                f"{DESCRIPTOR_MAGIC!r}")
    version, count, dim = struct.unpack("<III", raw[4:16])
    if version != DESCRIPTOR_VERSION:
        raise FormatError(path, f"unsupported version {version}, expected "
                                f"{DESCRIPTOR_VERSION}")
    if dim == 0:
        raise FormatError(path, "descriptor dimension is zero")
    expected = 16 + count * dim * 4
    if len(raw) != expected:
        raise FormatError(path, f"payload has {len(raw)} bytes, expected {expected} "
                                f"for {count} vectors of dimension {dim}",
                          offset=min(len(raw), expected))
    matrix = np.frombuffer(raw, dtype="<f4", offset=16).reshape(count, dim)
    if not np.isfinite(matrix).all():
        bad = int(np.argwhere(~np.isfinite(matrix))[0][0])
        raise FormatError(path, f"non-finite descriptor values in row {bad}")

    index_path = Path(str(path) + ".idx")
    if not index_path.exists():
        raise FormatError(index_path, "descriptor index sidecar not found")
    ids: list[str | None] = [None] * count
    for line_no, line in enumerate(index_path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(index_path, f"expected 'id,row', got {line!r}",
                              line=line_no)
        kf_id, row_text = parts[0].strip(), parts[1].strip()
        try:
            row = int(row_text)
        except ValueError:
            raise FormatError(index_path, f"row is not an integer: {row_text!r}",
                              line=line_no) from None
        if not 0 <= row < count:
            raise FormatError(index_path, f"row {row} outside 0..{count - 1}",
                              line=line_no)
        if ids[row] is not None:
            raise FormatError(index_path, f"row {row} indexed twice", line=line_no)
        ids[row] = kf_id
    if any(v is None for v in ids):
        missing = ids.index(None)
        raise FormatError(index_path, f"row {missing} has no index entry")
    if len(set(ids)) != count:
        raise FormatError(index_path, "duplicate keyframe ids in index")

    store = DescriptorStore(dim=dim, ids=ids, matrix=matrix.copy())
    if manifest is not None:
        if manifest.descriptor_dim != dim:
            raise FormatError(path, f"descriptor dimension {dim} does not match "
                                    f"manifest dimension {manifest.descriptor_dim}")
        for kf_id in manifest.keyframe_ids():
            if kf_id not in store:
                raise FormatError(index_path, f"manifest keyframe {kf_id!r} has no "
                                              f"descriptor")
    return store


# ---------------------------------------------------------------------------
# delimited tables

def _data_lines(path: Path):
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, stripped


def write_score_table(path, scores: dict[tuple[str, str], float],
                      symmetric: bool = True) -> None:
    lines = [f"#symmetric={'true' if symmetric else 'false'}"]
    for (a, b), value in sorted(scores.items()):
        lines.append(f"{a},{b},{value!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_score_table(path) -> tuple[dict[tuple[str, str], float], bool]:
    path = Path(path)
    text = path.read_text(encoding="utf-8").splitlines()
    header = None
    for line in text:
        if line.strip():
            header = line.strip()
            break
    if header is None or not header.startswith("#symmetric="):
        raise FormatError(path, "first line must declare '#symmetric=<bool>'", line=1)
    flag = header.split("=", 1)[1].strip().lower()
    if flag not in ("true", "false"):
        raise FormatError(path, f"symmetric flag must be true or false, got {flag!r}",
                          line=1)
    symmetric = flag == "true"
    scores: dict[tuple[str, str], float] = {}
    for line_no, line in _data_lines(path):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise FormatError(path, f"expected 'id_a,id_b,score', got {line!r}",
                              line=line_no)
        a, b, score_text = parts
        try:
            score = float(score_text)
        except ValueError:
            raise FormatError(path, f"score is not a number: {score_text!r}",
                              line=line_no) from None
        if not 0.0 <= score <= 1.0:
            raise FormatError(path, f"score {score} outside [0, 1]", line=line_no)
        key = (min(a, b), max(a, b)) if symmetric else (a, b)
        if key in scores:
            raise FormatError(path, f"duplicate entry for pair {key}", line=line_no)
        scores[key] = score
    return scores, symmetric


def write_count_table(path, counts: dict[tuple[str, str], int]) -> None:
    normalized = {(min(a, b), max(a, b)): int(v) for (a, b), v in counts.items()}
    lines = [f"{a},{b},{v}" for (a, b), v in sorted(normalized.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_count_table(path) -> dict[tuple[str, str], int]:
    path = Path(path)
    counts: dict[tuple[str, str], int] = {}
    for line_no, line in _data_lines(path):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise FormatError(path, f"expected 'id_a,id_b,count', got {line!r}",
                              line=line_no)
        a, b, count_text = parts
        try:
            count = int(count_text)
        except ValueError:
            raise FormatError(path, f"count is not an integer: {count_text!r}",
                              line=line_no) from None
        if count < 0:
            raise FormatError(path, f"count {count} is negative", line=line_no)
        key = (min(a, b), max(a, b))
        if key in counts:
            raise FormatError(path, f"duplicate entry for pair {key}", line=line_no)
        counts[key] = count
    return counts


# ---------------------------------------------------------------------------
# ground truth

def load_ground_truth(path, manifest: SessionManifest | None = None):
    from .evaluation import GroundTruth  # local import keeps module load light

    path = Path(path)
    known = {sm.id for sm in manifest.submaps} if manifest is not None else None
    pairs: list[tuple[str, str]] = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 2:
            raise FormatError(path, f"expected 'id_a,id_b', got {line!r}", line=line_no)
        a, b = parts
        if a == b:
            raise FormatError(path, f"self-covisibility pair {a!r} is implied and "
                                    f"must not be listed", line=line_no)
        if known is not None:
            for sid in (a, b):
                if sid not in known:
                    raise FormatError(path, f"submap {sid!r} is not in the session "
                                            f"manifest", line=line_no)
        pairs.append((a, b))
    return GroundTruth(pairs, known_ids=known)


def write_ground_truth(path, pairs) -> None:
    normalized = sorted({(min(a, b), max(a, b)) for a, b in pairs})
    lines = [f"{a},{b}" for a, b in normalized]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")


# ---------------------------------------------------------------------------
# classifier weights

def write_weights(path, weights: MlpWeights) -> None:
    payload = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "input_dim": weights.input_dim,
        "positive_class_index": weights.positive_class_index,
        "layers": [
            {
                "rows": int(layer.weights.shape[0]),
                "cols": int(layer.weights.shape[1]),
                "weights": [float(v) for v in layer.weights.reshape(-1)],
                "bias": [float(v) for v in layer.bias],
                "activation": layer.activation,
            }
            for layer in weights.layers
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_weights(path) -> MlpWeights:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise FormatError(path, "weights document must be a JSON object")
    version = payload.get("format_version")
    if version != WEIGHTS_FORMAT_VERSION:
        raise FormatError(path, f"unsupported format_version {version!r}")
    try:
        input_dim = int(payload["input_dim"])
        positive = int(payload.get("positive_class_index", 0))
        layer_entries = payload["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"bad weights header: {exc}")
    if not isinstance(layer_entries, list) or not layer_entries:
        raise FormatError(path, "weights document has no layers")
    layers: list[MlpLayer] = []
    for index, entry in enumerate(layer_entries):
        try:
            rows, cols = int(entry["rows"]), int(entry["cols"])
            flat = entry["weights"]
            bias = entry["bias"]
            activation = entry["activation"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"layer {index} malformed: {exc}")
        if activation not in ACTIVATIONS:
            raise FormatError(path, f"layer {index} has unknown activation "
                                    f"{activation!r}")
        if len(flat) != rows * cols:
            raise FormatError(path, f"layer {index} declares {rows}x{cols} but has "
                                    f"{len(flat)} weights")
        if len(bias) != rows:
            raise FormatError(path, f"layer {index} bias length {len(bias)} != rows "
                                    f"{rows}")
        layers.append(MlpLayer(
            weights=np.asarray(flat, dtype=np.float64).reshape(rows, cols),
            bias=np.asarray(bias, dtype=np.float64),
            activation=activation,
        ))
    weights = MlpWeights(layers=layers, input_dim=input_dim,
                         positive_class_index=positive)
    try:
        weights.validate()
    except ConfigError as exc:
        raise FormatError(path, str(exc)) from None
    return weights


# ---------------------------------------------------------------------------
# oracle spec and backend construction

def load_oracle_spec(path) -> dict:
    path = Path(path)
    data = _load_yaml(path)
    if not isinstance(data, dict):
        raise FormatError(path, "oracle spec root must be a mapping")
    if "places" not in data or not isinstance(data["places"], dict):
        raise FormatError(path, "oracle spec requires a 'places' mapping "
                                "(submap id -> place index)")
    return data


def _keyframe_places(places: dict, manifest: SessionManifest, path) -> dict[str, int]:
    by_keyframe: dict[str, int] = {}
    for sm in manifest.submaps:
        if sm.id not in places:
            raise FormatError(path, f"submap {sm.id!r} missing from oracle place map")
        place = int(places[sm.id])
        for kf in sm.keyframes:
            by_keyframe[kf.id] = place
    return by_keyframe


def build_similarity_backend(spec: dict, manifest: SessionManifest, base_dir,
                             seed_override: int | None = None) -> SimilarityBackend:
    base_dir = Path(base_dir)
    kind = spec.get("kind")
    if kind == "mlp":
        for field_name in ("weights", "descriptors"):
            if field_name not in spec:
                raise ConfigError(f"mlp similarity backend requires {field_name!r}")
        weights = load_weights(base_dir / spec["weights"])
        store = load_descriptors(base_dir / spec["descriptors"], manifest)
        return MlpSimilarityBackend(weights, store)
    if kind == "table":
        if "path" not in spec:
            raise ConfigError("table similarity backend requires 'path'")
        scores, symmetric = load_score_table(base_dir / spec["path"])
        _check_table_ids(scores, manifest, base_dir / spec["path"])
        missing = _missing_policy(spec, default_value=0.0)
        return TableSimilarityBackend(scores, symmetric=symmetric, missing=missing)
    if kind == "oracle":
        if "spec" not in spec:
            raise ConfigError("oracle similarity backend requires 'spec' "
                              "(path to the place map)")
        path = base_dir / spec["spec"]
        oracle = load_oracle_spec(path)
        noise = oracle.get("similarity", {})
        seed = int(oracle.get("seed", 0)) if seed_override is None else seed_override
        return OracleSimilarityBackend(
            _keyframe_places(oracle["places"], manifest, path),
            flip_probability=float(noise.get("flip_probability", 0.0)),
            jitter_sigma=float(noise.get("jitter_sigma", 0.0)),
            seed=seed,
        )
    raise ConfigError(f"unknown similarity backend kind {kind!r}")


def build_match_backend(spec: dict, manifest: SessionManifest, base_dir,
                        seed_override: int | None = None) -> MatchBackend:
    base_dir = Path(base_dir)
    kind = spec.get("kind")
    if kind == "table":
        if "path" not in spec:
            raise ConfigError("table match backend requires 'path'")
        counts = load_count_table(base_dir / spec["path"])
        _check_table_ids(counts, manifest, base_dir / spec["path"])
        missing = _missing_policy(spec, default_value=0)
        return TableMatchBackend(counts, missing=missing)
    if kind == "oracle":
        if "spec" not in spec:
            raise ConfigError("oracle match backend requires 'spec' "
                              "(path to the place map)")
        path = base_dir / spec["spec"]
        oracle = load_oracle_spec(path)
        matching = oracle.get("matching", {})
        seed = int(oracle.get("seed", 0)) if seed_override is None else seed_override
        try:
            same = CountDistribution.from_spec(matching.get("same_place",
                                                            {"constant": 150}))
            different = CountDistribution.from_spec(matching.get("different_place",
                                                                 {"constant": 5}))
        except ConfigError as exc:
            raise FormatError(path, str(exc)) from None
        return OracleMatchBackend(_keyframe_places(oracle["places"], manifest, path),
                                  same_place=same, different_place=different,
                                  seed=seed)
    raise ConfigError(f"unknown match backend kind {kind!r}")


def _missing_policy(spec: dict, default_value):
    policy = spec.get("missing", "error")
    if policy == "error":
        return None
    if policy == "default":
        return type(default_value)(spec.get("default", default_value))
    raise ConfigError(f"missing-entry policy must be 'error' or 'default', "
                      f"got {policy!r}")


def _check_table_ids(table: dict, manifest: SessionManifest, path) -> None:
    known = set(manifest.keyframe_ids())
    for a, b in table:
        for kf_id in (a, b):
            if kf_id not in known:
                raise FormatError(path, f"keyframe {kf_id!r} is not in the session "
                                        f"manifest")


def build_backends(backend_config: dict, manifest: SessionManifest, base_dir,
                   cfg: SlamConfig, seed_override: int | None = None,
                   ) -> tuple[SimilarityBackend | None, MatchBackend | None]:
    sim = None
    match = None
    if cfg.retrieval_enabled:
        spec = backend_config.get("similarity")
        if not spec:
            raise ConfigError("retrieval is enabled but the config declares no "
                              "similarity backend")
        sim = build_similarity_backend(spec, manifest, base_dir, seed_override)
    if cfg.matcher_enabled:
        spec = backend_config.get("matcher")
        if not spec:
            raise ConfigError("matcher is enabled but the config declares no "
                              "match backend")
        match = build_match_backend(spec, manifest, base_dir, seed_override)
    return sim, match


# ---------------------------------------------------------------------------
# run configuration

def load_config(path) -> tuple[SlamConfig, dict]:
    path = Path(path)
    data = _load_yaml(path)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise FormatError(path, "config root must be a mapping")
    slam_section = data.get("slam", {})
    try:
        cfg = SlamConfig.from_dict(slam_section)
    except (ConfigError, TypeError) as exc:
        raise FormatError(path, f"bad slam section: {exc}") from None
    backends = data.get("backends", {})
    if not isinstance(backends, dict):
        raise FormatError(path, "backends section must be a mapping")
    return cfg, backends


def write_config(path, cfg: SlamConfig, backends: dict) -> None:
    payload = {"slam": cfg.to_dict(), "backends": backends}
    Path(path).write_text(yaml.safe_dump(payload, sort_keys=True), encoding="utf-8")


# ---------------------------------------------------------------------------
# graph and decision log documents

def dump_json(payload) -> str:
    """Canonical JSON for byte-reproducible outputs."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_graph_file(path, graph: TopoGraph, session_id: str,
                     provenance: dict | None = None) -> None:
    payload = dict(graph.to_payload())
    payload["session_id"] = session_id
    if provenance:
        payload["provenance"] = provenance
    Path(path).write_text(dump_json(payload), encoding="utf-8")


def load_graph_file(path) -> tuple[TopoGraph, dict]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}") from None
    try:
        graph = TopoGraph.from_payload(payload)
    except (GraphError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"bad graph document: {exc}") from None
    return graph, payload


def write_decision_log(path, decisions, session_id: str,
                       provenance: dict | None = None) -> None:
    payload = {
        "session_id": session_id,
        "decisions": [d.to_dict() for d in decisions],
    }
    if provenance:
        payload["provenance"] = provenance
    Path(path).write_text(dump_json(payload), encoding="utf-8")


def load_decision_log(path) -> list[LocalizationDecision]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}") from None
    try:
        return [LocalizationDecision.from_dict(d) for d in payload["decisions"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(path, f"bad decision log: {exc}") from None


# ---------------------------------------------------------------------------

def _load_yaml(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise FormatError(path, f"invalid YAML: {exc}") from None
