"""Evaluation figures; every function renders one PNG and returns its path."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import RocPr


def plot_roc_pr(curves: Mapping[str, RocPr], path: str) -> str:
    fig, (ax_roc, ax_pr) = plt.subplots(1, 2, figsize=(10, 4.5))
    for name, c in curves.items():
        ax_roc.plot(*zip(*c.roc), label=f"{name} (AUC {c.auc_roc:.4f})")
        ax_pr.plot(*zip(*c.pr), label=f"{name} (AUC {c.auc_pr:.4f})")
    ax_roc.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax_roc.set_xlabel("false positive rate")
    ax_roc.set_ylabel("true positive rate")
    ax_roc.set_title("ROC")
    ax_pr.set_xlabel("recall")
    ax_pr.set_ylabel("precision")
    ax_pr.set_title("precision-recall")
    for ax in (ax_roc, ax_pr):
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_cutoff_sweep(
    sweep: Mapping[str, Sequence[tuple[float, float, float]]], path: str
) -> str:
    """One panel per metric; `sweep` maps a name to (cutoff, precision, recall)
    triples sorted by cutoff."""
    fig, (ax_p, ax_r) = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
    for name, rows in sweep.items():
        # undefined rates (no predictions above the cutoff) leave gaps
        p_pts = [(r[0], r[1]) for r in rows if r[1] is not None]
        r_pts = [(r[0], r[2]) for r in rows if r[2] is not None]
        if p_pts:
            ax_p.plot(*zip(*p_pts), marker="o", markersize=3, label=name)
        if r_pts:
            ax_r.plot(*zip(*r_pts), marker="o", markersize=3, label=name)
    ax_p.set_title("precision vs cutoff")
    ax_r.set_title("recall vs cutoff")
    for ax in (ax_p, ax_r):
        ax.set_xlabel("score cutoff")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=8)
    ax_p.set_ylabel("rate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_loss_curve(losses: Sequence[float], path: str, title: str = "training loss") -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(losses) + 1), losses, marker="o", markersize=3)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_elbow(inertias: Mapping[int, float], path: str) -> str:
    ks = sorted(inertias)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [inertias[k] for k in ks], marker="o")
    ax.set_xlabel("k")
    ax.set_ylabel("inertia")
    ax.set_title("k-means elbow")
    ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_scatter(
    coords: Mapping[str, tuple[float, float]],
    path: str,
    groups: Optional[Mapping[str, int]] = None,
    highlight: Sequence[str] = (),
) -> str:
    """2-D embedding scatter, optionally colored by group id with some
    points called out by name."""
    fig, ax = plt.subplots(figsize=(7, 6))
    ids = list(coords)
    xs = [coords[i][0] for i in ids]
    ys = [coords[i][1] for i in ids]
    colors = [groups.get(i, -1) for i in ids] if groups else None
    ax.scatter(xs, ys, s=6, c=colors, cmap="tab10", alpha=0.7)
    for name in highlight:
        if name in coords:
            x, y = coords[name]
            ax.annotate(name, (x, y), fontsize=7)
            ax.scatter([x], [y], s=30, facecolors="none", edgecolors="black")
    ax.set_xlabel("dim 1")
    ax.set_ylabel("dim 2")
    ax.set_title("embedding map")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_precision_bars(
    mean_p_at_n: Mapping[int, float], mrr: Optional[float], path: str
) -> str:
    ns = sorted(mean_p_at_n)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([f"P@{n}" for n in ns], [mean_p_at_n[n] for n in ns], width=0.5)
    ax.set_ylim(0, 1.02)
    ax.set_ylabel("mean precision")
    title = "recommendation quality"
    if mrr is not None:
        title += f" (MRR {mrr:.4f})"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
