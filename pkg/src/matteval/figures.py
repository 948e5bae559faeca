"""Figure rendering for CLI reports.

Kept separate from the analysis/metrics modules, which stay plotting-free;
only the CLI report path imports this. Uses the Agg backend so runs work
headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analysis import BinnedCorrelation  # noqa: E402


def save_series_figure(records: Sequence[dict], keys: Sequence[str], title: str, ylabel: str, path) -> Path:
    """Per-frame curves for the given numeric record keys."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    xs = range(len(records))
    labels = [r.get("frame_id", str(i)) for i, r in enumerate(records)]
    for key in keys:
        ys = [r.get(key) for r in records]
        if any(y is None for y in ys):
            continue
        ax.plot(list(xs), ys, marker="o", label=key)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_xlabel("frame")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_correlation_figure(binned: BinnedCorrelation, path) -> Path:
    """Bin means with sample-std error bars; marker size tracks bin count."""
    centers, means, stds, counts = [], [], [], []
    for b in binned.bins:
        if b.mean_pred is None:
            continue
        centers.append(0.5 * (b.lower + b.upper))
        means.append(b.mean_pred)
        stds.append(b.std_pred if b.std_pred is not None else 0.0)
        counts.append(b.count)
    fig, ax = plt.subplots(figsize=(6, 6))
    if centers:
        sizes = [20 + 180 * c / max(counts) for c in counts]
        ax.errorbar(centers, means, yerr=stds, fmt="none", ecolor="tab:blue", alpha=0.5, capsize=2)
        ax.scatter(centers, means, s=sizes, color="tab:blue", zorder=3)
    ax.plot([0, 1], [0, 1], "k--", alpha=0.4, label="identity")
    r = binned.pearson_r
    ax.set_title("predicted error vs true discrepancy" + (f" (r = {r:.4f})" if r is not None else " (r undefined)"))
    ax.set_xlabel("true patch discrepancy (normalized)")
    ax.set_ylabel("mean predicted error probability")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_components_figure(components: dict, title: str, path) -> Path:
    """Bar chart of named scalar loss components."""
    items = [(k, v) for k, v in sorted(components.items()) if isinstance(v, (int, float))]
    fig, ax = plt.subplots(figsize=(6, 4))
    if items:
        names = [k for k, _ in items]
        vals = [v for _, v in items]
        ax.bar(names, vals, color="tab:orange")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_title(title)
    ax.set_ylabel("value")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
