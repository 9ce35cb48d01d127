"""Evaluation reports: delimited table, JSON document, and rendered figures.

Figures are written next to the delimited output so a report directory is
self-contained. Matplotlib runs headless (Agg).
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .evaluation import VariantResult
from .graph import TopoGraph
from .ingestion import dump_json

REPORT_COLUMNS = ["variant", "precision", "recall", "tp", "fp", "fn", "tn",
                  "merges", "new_nodes", "sim_calls", "match_calls", "wall_time_s"]


def _fmt_metric(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _row(result: VariantResult) -> dict:
    c = result.counts
    return {
        "variant": result.name,
        "precision": _fmt_metric(result.precision),
        "recall": _fmt_metric(result.recall),
        "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
        "merges": c.tp + c.fp,
        "new_nodes": c.fn + c.tn,
        "sim_calls": result.sim_calls,
        "match_calls": result.match_calls,
        "wall_time_s": f"{result.wall_time_s:.3f}",
    }


def write_report_csv(path, results: Sequence[VariantResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for result in results:
            writer.writerow(_row(result))


def write_report_json(path, results: Sequence[VariantResult],
                      provenance: dict | None = None) -> None:
    payload = {"variants": [r.to_dict() for r in results]}
    if provenance:
        payload["provenance"] = provenance
    Path(path).write_text(dump_json(payload), encoding="utf-8")


def format_summary(results: Sequence[VariantResult]) -> str:
    """Human-readable ablation table, one row per variant."""
    header = f"{'variant':<28} {'P':>6} {'R':>6} {'tp':>4} {'fp':>4} {'fn':>4} " \
             f"{'tn':>4} {'sim':>8} {'match':>8} {'time':>8}"
    lines = [header, "-" * len(header)]
    for r in results:
        c = r.counts
        lines.append(
            f"{r.name:<28} {_fmt_metric(r.precision):>6} {_fmt_metric(r.recall):>6} "
            f"{c.tp:>4} {c.fp:>4} {c.fn:>4} {c.tn:>4} "
            f"{r.sim_calls:>8} {r.match_calls:>8} {r.wall_time_s:>7.2f}s")
    return "\n".join(lines)


def render_report_figures(out_dir, results: Sequence[VariantResult]) -> list[str]:
    out_dir = Path(out_dir)
    written = []

    names = [r.name for r in results]
    x = range(len(results))
    precision = [r.precision if r.precision is not None else 0.0 for r in results]
    recall = [r.recall if r.recall is not None else 0.0 for r in results]

    fig, ax = plt.subplots(figsize=(1.6 + 1.6 * len(results), 3.6))
    width = 0.38
    bars_p = ax.bar([i - width / 2 for i in x], precision, width, label="precision",
                    color="#3b6fb6")
    bars_r = ax.bar([i + width / 2 for i in x], recall, width, label="recall",
                    color="#b65a3b")
    for bars, values in ((bars_p, [r.precision for r in results]),
                         (bars_r, [r.recall for r in results])):
        for bar, value in zip(bars, values):
            ax.annotate("n/a" if value is None else f"{value:.2f}",
                        (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                        ha="center", va="bottom", fontsize=8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=15, ha="right", fontsize=8)
    ax.set_ylim(0, 1.12)
    ax.set_ylabel("score")
    ax.set_title("precision / recall per variant")
    ax.legend(fontsize=8)
    fig.tight_layout()
    pr_path = out_dir / "report_pr.png"
    fig.savefig(pr_path, dpi=150)
    plt.close(fig)
    written.append(str(pr_path))

    fig, ax = plt.subplots(figsize=(1.6 + 1.6 * len(results), 3.2))
    sim_calls = [r.sim_calls for r in results]
    match_calls = [r.match_calls for r in results]
    ax.bar([i - width / 2 for i in x], sim_calls, width, label="similarity calls",
           color="#3b6fb6")
    ax.bar([i + width / 2 for i in x], match_calls, width, label="match calls",
           color="#6aa84f")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=15, ha="right", fontsize=8)
    ax.set_ylabel("pairwise comparisons")
    ax.set_title("comparison counts per variant")
    ax.legend(fontsize=8)
    fig.tight_layout()
    cmp_path = out_dir / "report_comparisons.png"
    fig.savefig(cmp_path, dpi=150)
    plt.close(fig)
    written.append(str(cmp_path))
    return written


def render_graph_figure(graph: TopoGraph, path, title: str = "",
                        layout_seed: int = 7) -> str:
    """Node-and-edge picture of the topological map, sized by submap count."""
    g = nx.Graph()
    for node in graph.nodes:
        g.add_node(node.id)
    g.add_edges_from(graph.edges)
    pos = nx.spring_layout(g, seed=layout_seed)
    fig, ax = plt.subplots(figsize=(6.5, 6.5))
    sizes = [180 + 120 * len(node.submaps) for node in graph.nodes]
    nx.draw_networkx_edges(g, pos, ax=ax, edge_color="#999999")
    nx.draw_networkx_nodes(g, pos, ax=ax, node_size=sizes, node_color="#7fb2d9",
                           edgecolors="#2f5a7e")
    labels = {node.id: f"n{node.id}\n{len(node.submaps)}" for node in graph.nodes}
    nx.draw_networkx_labels(g, pos, labels=labels, ax=ax, font_size=7)
    cursor = graph.current_position
    nx.draw_networkx_nodes(g, pos, nodelist=[cursor], ax=ax,
                           node_size=sizes[cursor], node_color="#e8b84b",
                           edgecolors="#8a6a1d")
    ax.set_title(title or "topological map")
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
