"""Batch export entry points. Exit code 0 on success, 2 on any export error."""

from __future__ import annotations

import argparse
import sys

from .descriptors import export_descriptors
from .errors import ExportError
from .job import load_job
from .match_export import export_match_counts
from .weights_export import export_mlp_weights


def cmd_descriptors(args) -> int:
    job = load_job(args.job)
    out = export_descriptors(job)
    print(f"wrote {out} ({len(job.manifest.keyframe_ids())} keyframes)")
    return 0


def cmd_matches(args) -> int:
    job = load_job(args.job)
    out = export_match_counts(job)
    print(f"wrote {out}")
    return 0


def cmd_weights(args) -> int:
    out = export_mlp_weights(args.checkpoint, args.out,
                             positive_class_index=args.positive_class_index,
                             hidden_activation=args.activation,
                             expected_layers=args.layers)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract-tools",
        description="Produce descriptor, match-count and weights files from "
                    "keyframe images and checkpoints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_desc = sub.add_parser("descriptors", help="export keyframe descriptors")
    p_desc.add_argument("--job", required=True, help="job description (YAML)")
    p_desc.set_defaults(func=cmd_descriptors)

    p_match = sub.add_parser("matches", help="export pairwise match counts")
    p_match.add_argument("--job", required=True)
    p_match.set_defaults(func=cmd_matches)

    p_w = sub.add_parser("weights", help="convert a classifier checkpoint")
    p_w.add_argument("--checkpoint", required=True)
    p_w.add_argument("--out", required=True)
    p_w.add_argument("--positive-class-index", type=int, default=0)
    p_w.add_argument("--activation", choices=["relu", "none"], default="relu")
    p_w.add_argument("--layers", type=int, default=5,
                     help="expected number of affine layers")
    p_w.set_defaults(func=cmd_weights)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ExportError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
