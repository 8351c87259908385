"""Matplotlib figures for reports: LROC curves and interval plots.

Everything renders through the non-interactive Agg backend so the CLI works
on headless machines.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import StudyAnalysis  # noqa: E402
from .annotations import Arm  # noqa: E402
from .lroc import LrocCurve  # noqa: E402

__all__ = ["plot_lroc", "plot_lroc_grid", "plot_endpoint_forest", "plot_auc_intervals"]

_ARM_STYLE = {
    Arm.CONTROL: dict(color="tab:blue", marker="o", label="control"),
    Arm.STUDY: dict(color="tab:red", marker="s", label="study"),
}


def _draw_lroc(ax, curves: Iterable[LrocCurve]) -> None:
    title = None
    for c in curves:
        xs, ys = zip(*c.polyline())
        style = _ARM_STYLE[c.arm]
        ax.plot(xs, ys, color=style["color"], lw=1.5,
                label=f"{style['label']} (AUC {c.auc:.2f})")
        ax.plot([p.fpr for p in c.points], [p.sens for p in c.points], ls="none",
                marker=style["marker"], ms=3, color=style["color"])
        title = c.anomaly.label
    ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, ls="--")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("1 - specificity")
    ax.set_ylabel("sensitivity")
    ax.legend(loc="lower right", fontsize="small")
    if title:
        ax.set_title(title)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_lroc(curves: Sequence[LrocCurve], path: str | Path) -> Path:
    """Control and study LROC curves of one anomaly type."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    _draw_lroc(ax, curves)
    return _save(fig, path)


def plot_lroc_grid(pairs: Sequence[Sequence[LrocCurve]], path: str | Path) -> Path:
    """All anomaly types side by side, two rows of three."""
    ncols = 3
    nrows = max(1, -(-len(pairs) // ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 4 * nrows), squeeze=False)
    flat = axes.ravel()
    for ax, curves in zip(flat, pairs):
        _draw_lroc(ax, curves)
    for ax in flat[len(pairs):]:
        ax.set_axis_off()
    fig.tight_layout()
    return _save(fig, path)


def plot_endpoint_forest(analysis: StudyAnalysis, path: str | Path) -> Path:
    """Point estimates with confidence intervals, control vs study, per endpoint."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 0.5 * len(analysis.rows) + 2), sharey=True)
    labels = [r.anomaly.label for r in analysis.rows]
    ys = range(len(labels))
    for ax, endpoint in zip(axes, ("sens", "spec")):
        for arm, offset in ((Arm.CONTROL, 0.12), (Arm.STUDY, -0.12)):
            res = [getattr(r.endpoints, f"{endpoint}_{arm.value}") for r in analysis.rows]
            est = [100 * e.estimate for e in res]
            err = [[100 * (e.estimate - e.ci[0]) for e in res], [100 * (e.ci[1] - e.estimate) for e in res]]
            style = _ARM_STYLE[arm]
            ax.errorbar(est, [y + offset for y in ys], xerr=err, fmt=style["marker"], ms=4,
                        color=style["color"], capsize=3, label=style["label"])
        ax.set_title("sensitivity (%)" if endpoint == "sens" else "specificity (%)")
        ax.set_xlim(0, 100)
        ax.grid(axis="x", color="0.9")
    axes[0].set_yticks(list(ys))
    axes[0].set_yticklabels(labels)
    axes[0].invert_yaxis()
    axes[1].legend(loc="lower left", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_auc_intervals(analysis: StudyAnalysis, path: str | Path) -> Path:
    rows = [r for r in analysis.rows if r.auc_control is not None and r.auc_study is not None]
    fig, ax = plt.subplots(figsize=(6, 0.5 * max(len(rows), 1) + 2))
    ys = range(len(rows))
    for arm, offset in ((Arm.CONTROL, 0.12), (Arm.STUDY, -0.12)):
        stats = [getattr(r, f"auc_{arm.value}") for r in rows]
        style = _ARM_STYLE[arm]
        ax.errorbar([s.a for s in stats], [y + offset for y in ys],
                    xerr=[[s.a - s.ci[0] for s in stats], [s.ci[1] - s.a for s in stats]],
                    fmt=style["marker"], ms=4, color=style["color"], capsize=3, label=style["label"])
    ax.set_yticks(list(ys))
    ax.set_yticklabels([r.anomaly.label for r in rows])
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("AUC")
    ax.grid(axis="x", color="0.9")
    ax.legend(loc="lower left", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)
