"""Figure + delimited-file reporting.

Renders the three analysis views (state graph, per-player sequence scatter,
per-team group scatter) and the agreement panel as PNG figures, with the
backing numbers written next to them as CSV so downstream tooling never has
to scrape a figure.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import DegenerateInputError
from .service import SessionHandle, WorkbenchApp


def render_report(app: WorkbenchApp, handle: SessionHandle, rater: str,
                  out_dir: Path, metric: str = "jaccard", mode: str = "collapsed",
                  k: int = 2, seed: int = 0,
                  irr_raters: Optional[list[str]] = None,
                  bin_ms: int = 1000) -> dict[str, Any]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    skipped: dict[str, str] = {}

    state_doc = app.compute_state_graph(handle, {"rater": rater, "scope": "player"})
    written += _write_state_csvs(state_doc, out_dir)
    written.append(_plot_state_graph(state_doc, out_dir / "state_graph.png",
                                     title=f"state graph — {handle.session.id} / {rater}"))

    for scope, stem in (("player", "sequence_graph"), ("team", "group_graph")):
        try:
            doc = app.compute_scatter(handle, {"rater": rater, "metric": metric,
                                               "mode": mode, "k": str(k),
                                               "seed": str(seed)}, scope)
        except DegenerateInputError as err:
            skipped[stem] = err.message
            continue
        written.append(_write_scatter_csv(doc, out_dir / f"{stem}_nodes.csv"))
        written.append(_write_matrix_csv(doc["matrix"], out_dir / f"{stem}_distances.csv"))
        written.append(_plot_scatter(doc, out_dir / f"{stem}.png",
                                     title=f"{scope} sequences — {handle.session.id}"))

    if irr_raters:
        irr_doc = app.compute_irr(handle, {"raterA": irr_raters[0],
                                           "raterB": irr_raters[1],
                                           "bin_ms": str(bin_ms)})
        written.append(_write_confusion_csv(irr_doc, out_dir / "irr_confusion.csv"))
        written.append(_plot_confusion(irr_doc, out_dir / "irr_confusion.png"))

    return {"out_dir": str(out_dir), "files": sorted(written), "skipped": skipped}


# -- csv ----------------------------------------------------------------------

def _write_state_csvs(doc: dict[str, Any], out_dir: Path) -> list[str]:
    nodes_path = out_dir / "state_graph_nodes.csv"
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "visits", "starts"])
        for node in doc["nodes"]:
            writer.writerow([node["state"], node["visits"], node["starts"]])
    edges_path = out_dir / "state_graph_edges.csv"
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from", "to", "count"])
        for edge in doc["edges"]:
            writer.writerow([edge["from"], edge["to"], edge["count"]])
    return [str(nodes_path), str(edges_path)]


def _write_scatter_csv(doc: dict[str, Any], path: Path) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner_kind", "owner_id", "x", "y", "cluster"])
        for node in doc["nodes"]:
            writer.writerow([node["owner"]["kind"], node["owner"]["id"],
                             repr(node["x"]), repr(node["y"]), node["cluster"]])
    return str(path)


def _write_matrix_csv(matrix_doc: dict[str, Any], path: Path) -> str:
    owners = [o["id"] for o in matrix_doc["owners"]]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner"] + owners)
        for owner, row in zip(owners, matrix_doc["values"]):
            writer.writerow([owner] + [repr(v) for v in row])
    return str(path)


def _write_confusion_csv(doc: dict[str, Any], path: Path) -> str:
    categories = doc["categories"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + categories)
        for cat, row in zip(categories, doc["confusion"]):
            writer.writerow([cat] + row)
        writer.writerow([])
        writer.writerow(["kappa", "" if doc["kappa"] is None else repr(doc["kappa"])])
        writer.writerow(["percent_agreement", repr(doc["percent_agreement"])])
        writer.writerow(["bin_ms", doc["bin_ms"]])
        writer.writerow(["cells", doc["cell_count"]])
    return str(path)


# -- figures ------------------------------------------------------------------

def _plot_state_graph(doc: dict[str, Any], path: Path, title: str) -> str:
    states = [n["state"] for n in doc["nodes"]]
    fig, ax = plt.subplots(figsize=(8, 8))
    if states:
        n = len(states)
        angles = {s: 2 * math.pi * i / n for i, s in enumerate(states)}
        pos = {s: (math.cos(a), math.sin(a)) for s, a in angles.items()}
        max_count = max((e["count"] for e in doc["edges"]), default=1)
        for edge in doc["edges"]:
            (x0, y0), (x1, y1) = pos[edge["from"]], pos[edge["to"]]
            width = 0.5 + 2.5 * edge["count"] / max_count
            if edge["from"] == edge["to"]:
                ax.add_patch(plt.Circle((x0 * 1.12, y0 * 1.12), 0.05, fill=False,
                                        lw=width, color="tab:gray", alpha=0.7))
            else:
                ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                            arrowprops=dict(arrowstyle="-|>", lw=width,
                                            color="tab:gray", alpha=0.7,
                                            shrinkA=12, shrinkB=12))
        max_visits = max(n_["visits"] for n_ in doc["nodes"])
        for node in doc["nodes"]:
            x, y = pos[node["state"]]
            size = 200 + 1800 * node["visits"] / max_visits
            ax.scatter([x], [y], s=size, color="tab:blue", zorder=3, alpha=0.85)
            ax.annotate(f'{node["state"]} ({node["visits"]})', (x, y),
                        textcoords="offset points", xytext=(0, 14),
                        ha="center", fontsize=8, zorder=4)
        ax.set_xlim(-1.45, 1.45)
        ax.set_ylim(-1.45, 1.45)
    ax.set_title(title)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def _plot_scatter(doc: dict[str, Any], path: Path, title: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 6))
    clusters = sorted({n["cluster"] for n in doc["nodes"]})
    cmap = plt.get_cmap("tab10")
    for cid in clusters:
        xs = [n["x"] for n in doc["nodes"] if n["cluster"] == cid]
        ys = [n["y"] for n in doc["nodes"] if n["cluster"] == cid]
        ax.scatter(xs, ys, s=160, color=cmap(cid % 10), label=f"cluster {cid}",
                   alpha=0.85, edgecolors="black", linewidths=0.5)
    for node in doc["nodes"]:
        ax.annotate(node["owner"]["id"], (node["x"], node["y"]),
                    textcoords="offset points", xytext=(0, 11),
                    ha="center", fontsize=8)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="best", fontsize=8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def _plot_confusion(doc: dict[str, Any], path: Path) -> str:
    categories = doc["categories"]
    confusion = doc["confusion"]
    fig, ax = plt.subplots(figsize=(1.2 + 0.55 * len(categories),
                                    1.2 + 0.55 * len(categories)))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(len(categories)), categories, rotation=45,
                  ha="right", fontsize=7)
    ax.set_yticks(range(len(categories)), categories, fontsize=7)
    for i in range(len(categories)):
        for j in range(len(categories)):
            if confusion[i][j]:
                ax.text(j, i, str(confusion[i][j]), ha="center", va="center",
                        fontsize=6)
    kappa = "undefined" if doc["kappa"] is None else f'{doc["kappa"]:.3f}'
    ax.set_title(f'kappa={kappa}, agreement={doc["percent_agreement"]:.1%}',
                 fontsize=9)
    ax.set_xlabel("rater B")
    ax.set_ylabel("rater A")
    fig.colorbar(im, shrink=0.8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return str(path)
