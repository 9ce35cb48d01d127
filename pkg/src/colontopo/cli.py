"""Command-line entry points: build a map, evaluate variants, generate
synthetic sessions, export graphs.

Exit codes: 0 success, 1 pipeline failure, 2 bad input (I/O, format or
config). All paths are resolved against --workdir.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import ingestion, reporting
from .errors import ColontopoError, ConfigError, FormatError, PipelineError
from .evaluation import ablation_variants, evaluate_session
from .graph import TopoGraph
from .matching import CountDistribution
from .simulator import WorldConfig, generate_world, write_world
from .slam import SlamConfig, run_session

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_INPUT = 2


def graph_to_dot(graph: TopoGraph, name: str = "topomap") -> str:
    """Deterministic DOT document: nodes in id order, edges sorted."""
    lines = [f"graph {name} {{"]
    for node in graph.nodes:
        count = len(node.submaps)
        plural = "submap" if count == 1 else "submaps"
        lines.append(f'  n{node.id} [label="n{node.id} [{count} {plural}]"];')
    for a, b in sorted(graph.edges):
        lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", "--window-radius", dest="window_radius", type=int,
                        default=None, help="topological prior window radius (hops)")
    parser.add_argument("--th-sim", "--retrieval-threshold", dest="retrieval_threshold",
                        type=float, default=None,
                        help="retrieval score acceptance threshold (strict >)")
    parser.add_argument("--th-lg", "--match-threshold", dest="match_threshold",
                        type=int, default=None,
                        help="match-count acceptance threshold (strict >)")
    parser.add_argument("--prior", dest="prior_enabled",
                        action=argparse.BooleanOptionalAction, default=None,
                        help="restrict candidates to the window (--no-prior scans "
                             "every node)")
    parser.add_argument("--matcher", dest="matcher_enabled",
                        action=argparse.BooleanOptionalAction, default=None,
                        help="enable the match-count trigger")
    parser.add_argument("--retrieval", dest="retrieval_enabled",
                        action=argparse.BooleanOptionalAction, default=None,
                        help="enable the retrieval trigger")
    parser.add_argument("--similarity-kind", choices=["mlp", "table", "oracle"],
                        default=None, help="override the similarity backend kind")
    parser.add_argument("--matcher-kind", choices=["table", "oracle"], default=None,
                        help="override the match backend kind")
    parser.add_argument("--seed", type=int, default=None,
                        help="override oracle backend seeds")


def _collect_overrides(args) -> dict:
    fields = ("window_radius", "retrieval_threshold", "match_threshold",
              "prior_enabled", "matcher_enabled", "retrieval_enabled")
    return {name: getattr(args, name) for name in fields
            if getattr(args, name) is not None}


def _effective_config(args, workdir: Path) -> tuple[SlamConfig, dict, dict]:
    cfg, backends = ingestion.load_config(workdir / args.config)
    overrides = _collect_overrides(args)
    cfg = cfg.replace(**overrides)
    if args.similarity_kind is not None:
        backends.setdefault("similarity", {})["kind"] = args.similarity_kind
        overrides["similarity_kind"] = args.similarity_kind
    if args.matcher_kind is not None:
        backends.setdefault("matcher", {})["kind"] = args.matcher_kind
        overrides["matcher_kind"] = args.matcher_kind
    if args.seed is not None:
        overrides["seed"] = args.seed
    return cfg, backends, overrides


def _provenance(cfg: SlamConfig, overrides: dict, sim_backend, match_backend,
                session_id: str) -> dict:
    return {
        "session_id": session_id,
        "config": cfg.to_dict(),
        "flag_overrides": overrides,
        "backends": {
            "similarity": sim_backend.describe() if sim_backend else None,
            "matcher": match_backend.describe() if match_backend else None,
        },
    }


def cmd_build(args) -> int:
    workdir = Path(args.workdir)
    out_dir = workdir / args.out if args.out else workdir
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = ingestion.load_session(workdir / args.session)
    cfg, backend_spec, overrides = _effective_config(args, workdir)
    sim, match = ingestion.build_backends(backend_spec, manifest, workdir, cfg,
                                          seed_override=args.seed)
    graph, decisions = run_session(manifest.submaps, cfg, sim, match)
    provenance = _provenance(cfg, overrides, sim, match, manifest.session_id)
    graph_path = out_dir / "graph.json"
    log_path = out_dir / "decisions.json"
    ingestion.write_graph_file(graph_path, graph, manifest.session_id, provenance)
    ingestion.write_decision_log(log_path, decisions, manifest.session_id, provenance)
    written = [graph_path, log_path]
    if args.figure:
        figure_path = out_dir / "graph.png"
        reporting.render_graph_figure(graph, figure_path,
                                      title=manifest.session_id)
        written.append(figure_path)
    merges = sum(1 for d in decisions if d.outcome == "merged")
    print(f"built {len(graph)} nodes, {len(graph.edges)} edges from "
          f"{len(manifest.submaps)} submaps ({merges} merged)")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _load_variants(path, base: SlamConfig) -> list[tuple[str, SlamConfig]]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not isinstance(data.get("variants"), list):
        raise FormatError(path, "variants document must contain a 'variants' list")
    variants = []
    for index, entry in enumerate(data["variants"]):
        try:
            name = str(entry["name"])
        except (KeyError, TypeError):
            raise FormatError(path, f"variant {index} has no name") from None
        overrides = entry.get("overrides", {})
        try:
            variants.append((name, base.replace(**overrides)))
        except (ConfigError, TypeError) as exc:
            raise FormatError(path, f"variant {name!r}: {exc}") from None
    if not variants:
        raise FormatError(path, "variants list is empty")
    return variants


def cmd_eval(args) -> int:
    workdir = Path(args.workdir)
    out_dir = workdir / args.out if args.out else workdir
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = ingestion.load_session(workdir / args.session)
    gt = ingestion.load_ground_truth(workdir / args.gt, manifest)
    cfg, backend_spec, overrides = _effective_config(args, workdir)
    if args.variants:
        variants = _load_variants(workdir / args.variants, cfg)
    else:
        variants = ablation_variants(cfg)
    # Backends are loaded for the union of needs across variants.
    union_cfg = cfg.replace(
        matcher_enabled=any(c.matcher_enabled for _, c in variants),
        retrieval_enabled=any(c.retrieval_enabled for _, c in variants),
    )
    sim, match = ingestion.build_backends(backend_spec, manifest, workdir, union_cfg,
                                          seed_override=args.seed)
    results = evaluate_session(manifest.submaps, gt, variants, sim, match)

    provenance = _provenance(cfg, overrides, sim, match, manifest.session_id)
    csv_path = out_dir / "report.csv"
    json_path = out_dir / "report.json"
    reporting.write_report_csv(csv_path, results)
    reporting.write_report_json(json_path, results, provenance)
    written = [str(csv_path), str(json_path)]
    for result in results:
        safe = result.name.replace("/", "_").replace(" ", "_")
        log_path = out_dir / f"decisions_{safe}.json"
        ingestion.write_decision_log(log_path, result.decisions,
                                     manifest.session_id, provenance)
        written.append(str(log_path))
    written.extend(reporting.render_report_figures(out_dir, results))
    print(reporting.format_summary(results))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    workdir = Path(args.workdir)
    out_dir = workdir / args.out
    traversal = None
    if args.traversal:
        try:
            traversal = [int(tok) for tok in args.traversal.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"traversal must be comma-separated integers, "
                              f"got {args.traversal!r}") from None
    cfg = WorldConfig(
        num_places=args.places,
        traversal=traversal,
        revisit_probability=args.revisit_prob,
        max_back_jump=args.max_back_jump,
        dwell_probability=args.dwell_prob,
        keyframes_per_submap=(args.kf_min, args.kf_max),
        flip_probability=args.p_flip,
        jitter_sigma=args.jitter_sigma,
        same_place_counts=CountDistribution("constant", args.same_count),
        different_place_counts=CountDistribution("constant", args.diff_count),
        seed=args.seed if args.seed is not None else 0,
    )
    world = generate_world(cfg)
    paths = write_world(world, out_dir, emit_tables=args.emit_tables)
    print(f"generated {len(world.traversal)} submaps over "
          f"{world.num_distinct_places()} places (seed {cfg.seed})")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    workdir = Path(args.workdir)
    graph, payload = ingestion.load_graph_file(workdir / args.graph)
    dot = graph_to_dot(graph)
    if args.out:
        out_path = workdir / args.out
        out_path.write_text(dot, encoding="utf-8")
        print(f"wrote {out_path}")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colontopo",
        description="Topological mapping of colonoscopy submap sequences.")
    parser.add_argument("--workdir", default=".",
                        help="base directory for all relative paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build a topological map from a session")
    p_build.add_argument("--session", required=True, help="session manifest (YAML)")
    p_build.add_argument("--config", required=True, help="run config (YAML)")
    p_build.add_argument("--out", default=None, help="output directory")
    p_build.add_argument("--figure", action=argparse.BooleanOptionalAction,
                         default=True, help="also render graph.png")
    _add_override_flags(p_build)
    p_build.set_defaults(func=cmd_build)

    p_eval = sub.add_parser("eval", help="evaluate config variants against labels")
    p_eval.add_argument("--session", required=True)
    p_eval.add_argument("--gt", required=True, help="covisibility pair list")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--variants", default=None,
                        help="variants YAML (default: retrieval / +prior / +matcher)")
    p_eval.add_argument("--out", default=None)
    _add_override_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_sim = sub.add_parser("simulate", help="generate a synthetic session")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--places", type=int, default=8)
    p_sim.add_argument("--traversal", default=None,
                       help="explicit place sequence, e.g. 0,1,2,1,0")
    p_sim.add_argument("--revisit-prob", type=float, default=0.3)
    p_sim.add_argument("--max-back-jump", type=int, default=3)
    p_sim.add_argument("--dwell-prob", type=float, default=0.1)
    p_sim.add_argument("--kf-min", type=int, default=8)
    p_sim.add_argument("--kf-max", type=int, default=16)
    p_sim.add_argument("--p-flip", type=float, default=0.0)
    p_sim.add_argument("--jitter-sigma", type=float, default=0.0)
    p_sim.add_argument("--same-count", type=int, default=150)
    p_sim.add_argument("--diff-count", type=int, default=5)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--emit-tables", action="store_true",
                       help="also flatten the oracle into score/count tables")
    p_sim.set_defaults(func=cmd_simulate)

    p_dot = sub.add_parser("export-dot", help="render a graph file as DOT")
    p_dot.add_argument("--graph", required=True, help="graph JSON from build")
    p_dot.add_argument("--out", default=None, help="output file (default stdout)")
    p_dot.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else exc
        print(f"error: file not found: {name}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ColontopoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
