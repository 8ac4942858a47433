"""Figures written next to the delimited reports of ``stats`` and ``eval``."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from kgretrieve._io import atomic_write  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    # keeps repeated renders byte-identical
    "svg.hashsalt": "kgretrieve",
    "path.simplify": True,
}


def new_figure(width: float = 6.0, height: float | None = None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(width, height or width * golden))
    return fig, ax


def _save(fig, path) -> None:
    path = str(path)
    fmt = path.rsplit(".", 1)[-1].lower() if "." in path else "png"
    metadata = {"Software": None} if fmt == "png" else {"Date": None} if fmt in ("svg", "pdf") else None
    with plt.rc_context(_RC), atomic_write(path, "wb") as fh:
        fig.savefig(fh, format=fmt, bbox_inches="tight", dpi=150, metadata=metadata)
    plt.close(fig)


def plot_subgraph_sizes(sizes: Mapping[str, Sequence[int]], path, nonempty: Mapping[str, float] | None = None) -> None:
    """Histogram of subgraph sizes (triples per claim), one series per strategy."""
    fig, ax = new_figure()
    with plt.rc_context(_RC):
        top = max((max(v, default=0) for v in sizes.values()), default=0)
        bins = range(0, top + 2) if top < 40 else 40
        for name, values in sizes.items():
            label = name
            if nonempty and name in nonempty:
                label = f"{name} ({100 * nonempty[name]:.1f}% non-empty)"
            ax.hist(list(values), bins=bins, histtype="step", linewidth=1.2, label=label)
        ax.set_xlabel("triples per claim")
        ax.set_ylabel("claims")
        if any(sizes.values()):
            ax.set_yscale("symlog", linthresh=1)
        ax.legend(frameon=False)
    _save(fig, path)


def plot_type_scores(report, path) -> None:
    """Grouped bars of accuracy and F1 for each reasoning-type column and the total."""
    cols = report.columns()
    names = [n for n, _ in cols]
    acc = [0.0 if e is None else 100 * e[0].accuracy for _, e in cols]
    f1 = [0.0 if e is None else 100 * e[0].f1 for _, e in cols]
    fig, ax = new_figure()
    with plt.rc_context(_RC):
        x = range(len(names))
        w = 0.38
        ax.bar([i - w / 2 for i in x], acc, width=w, label="accuracy")
        ax.bar([i + w / 2 for i in x], f1, width=w, label="F1")
        ax.set_xticks(list(x))
        ax.set_xticklabels(names)
        ax.set_ylim(0, 100)
        ax.set_ylabel("%")
        ax.legend(frameon=False, loc="lower right")
    _save(fig, path)
