"""Render a capacity report to files: delimited per-server data plus
figures of the storage graph and the optimal download vector."""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .capacity import CapacityReport, capacity_report
from .storage import StoragePattern, build_graph, servers_above_replication


def render_report(pattern: StoragePattern, x: int, t: int, out_dir) -> dict:
    """Write capacity.csv, storage_graph.png and downloads.png under
    ``out_dir``; returns the report dict with the file paths added."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = capacity_report(pattern, x, t)

    csv_path = out_dir / "capacity.csv"
    _write_csv(csv_path, pattern, rep)
    graph_path = out_dir / "storage_graph.png"
    _draw_graph(graph_path, pattern, t if x == 0 else None, rep)
    bars_path = out_dir / "downloads.png"
    _draw_downloads(bars_path, pattern, rep)

    result = rep.to_json_dict()
    result["files"] = {
        "csv": str(csv_path),
        "storage_graph": str(graph_path),
        "downloads": str(bars_path),
    }
    return result


def _write_csv(path, pattern: StoragePattern, rep: CapacityReport):
    downloads = rep.upper_witness or tuple(Fraction(0) for _ in pattern.server_ids())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["server", "stored_sets", "optimal_download", "download_float", "in_lower_witness"]
        )
        for n in pattern.server_ids():
            stored = sorted(
                m for m in pattern.message_indices() if n in pattern.servers_of(m)
            )
            d_n = downloads[n - 1] if n - 1 < len(downloads) else Fraction(0)
            writer.writerow(
                [
                    n,
                    ";".join(str(m) for m in stored),
                    str(d_n),
                    float(d_n),
                    int(n in rep.lower_witness),
                ]
            )
        writer.writerow([])
        writer.writerow(["lower", str(rep.lower), float(rep.lower), "", ""])
        writer.writerow(["upper", str(rep.upper), float(rep.upper), "", ""])
        writer.writerow(["matched", int(rep.matched), "", "", ""])


def _layout(vertices):
    """Evenly spaced points on a circle, deterministic in vertex order."""
    n = max(1, len(vertices))
    return {
        v: (math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n))
        for i, v in enumerate(vertices)
    }


def _draw_graph(path, pattern: StoragePattern, t, rep: CapacityReport):
    graph = build_graph(pattern)
    pos = _layout(sorted(graph.vertices))
    fig, ax = plt.subplots(figsize=(5, 5))
    for u, v in sorted(graph.edges):
        xs, ys = zip(pos[u], pos[v])
        ax.plot(xs, ys, color="0.6", zorder=1, linewidth=1.2)

    heavy = set()
    stable = set(rep.certificates.get("composite", {}).get("stable_set", []))
    if t is not None:
        heavy = set(servers_above_replication(pattern, t + 1))
    for v in graph.vertices:
        edge_color = "tab:red" if v in heavy else "black"
        face = "mistyrose" if v in stable else "white"
        ax.scatter(
            *pos[v], s=600, zorder=2, facecolor=face, edgecolor=edge_color, linewidths=1.8
        )
        ax.annotate(
            str(v), pos[v], ha="center", va="center", zorder=3, fontsize=11
        )
    ax.set_title(
        f"storage graph (lower={rep.lower}, upper={rep.upper},"
        f" {'matched' if rep.matched else 'open'})"
    )
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _draw_downloads(path, pattern: StoragePattern, rep: CapacityReport):
    servers = list(pattern.server_ids())
    values = [float(v) for v in rep.upper_witness] or [0.0] * len(servers)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    colors = [
        "tab:blue" if n in rep.lower_witness else "0.7" for n in servers
    ]
    ax.bar([str(n) for n in servers], values, color=colors)
    total = sum(values)
    ax.set_xlabel("server")
    ax.set_ylabel("normalized download")
    ax.set_title(f"optimal download vector (total = {total:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
