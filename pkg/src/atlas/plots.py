"""Matplotlib figures for run reports: per-design outcome grid and ablation bars."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from atlas.report import RunReport  # noqa: E402


def outcome_grid(report: RunReport, path: Path | str) -> Path:
    """One row per design; columns show detection, property and proof outcome."""
    cols = ("detected", "prop", "fv")
    data = [[1.0 if r.detected else 0.0, 1.0 if r.prop_ok else 0.0, 1.0 if r.fv_ok else 0.0]
            for r in report.rows]
    fig, ax = plt.subplots(figsize=(4.5, 0.4 * max(len(data), 1) + 1.2))
    if data:
        ax.imshow(data, cmap="RdYlGn", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(cols)), labels=cols)
    ax.set_yticks(range(len(report.rows)), labels=[r.design for r in report.rows])
    agg = report.aggregates
    ax.set_title(f"detected {agg.get('detected', 0)}/{agg.get('graded', 0)}, "
                 f"accurate {agg.get('accurate', 0)}", fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def ablation_bars(reports: dict[str, RunReport], path: Path | str) -> Path:
    """Detected and accurate counts per context configuration."""
    labels = list(reports)
    detected = [reports[k].aggregates.get("detected", 0) for k in labels]
    accurate = [reports[k].aggregates.get("accurate", 0) for k in labels]
    xs = range(len(labels))
    fig, ax = plt.subplots(figsize=(1.1 * len(labels) + 2, 3.5))
    ax.bar([x - 0.2 for x in xs], detected, width=0.4, label="CWE detected")
    ax.bar([x + 0.2 for x in xs], accurate, width=0.4, label="accurate property")
    ax.set_xticks(list(xs), labels=labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("designs")
    ax.legend(fontsize=8, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
