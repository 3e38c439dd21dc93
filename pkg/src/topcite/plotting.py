"""Static figures written next to the delimited report output.

The output format follows the file suffix (``.png``, ``.svg``, ``.pdf``).
Date stamps and SVG element ids are pinned so identical data gives
identical files.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "topcite",
    "figure.dpi": 100,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
})


def _save(fig, path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "png"
    metadata = {"png": {"Software": None}, "svg": {"Date": None},
                "pdf": {"CreationDate": None, "ModDate": None}}.get(fmt)
    fig.savefig(os.fspath(path), format=fmt, metadata=metadata, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_percentile_curves(curves: dict[str, Sequence[tuple[float, float]]], path):
    """Expected papers against top percentile, both axes logarithmic."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for label, points in curves.items():
        xs, ys = zip(*points)
        ax.loglog(xs, ys, marker="o", label=label)
    ax.invert_xaxis()
    ax.set_xlabel("top percentile x (%)")
    ax.set_ylabel("expected number of papers")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_cumulative(curve, path, title: str = ""):
    ranks = [r.rank for r in curve.rows]
    running = [r.running_total for r in curve.rows]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(ranks, running, marker=".", label="CFAL running total")
    ax.axhline(curve.afcl, color="k", linestyle="--", linewidth=1, label="AFCL")
    if curve.prefix_to_afcl is not None:
        ax.axvline(curve.prefix_to_afcl, color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("rank of unit")
    ax.set_ylabel(f"expected papers in the {curve.level}")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, loc="lower right")
    return _save(fig, path)


def plot_ratio_vs_rank(ratios: Sequence[float], quadratic: Sequence[float], path):
    ranks = np.arange(1, len(ratios) + 1)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(ranks, ratios, ".", markersize=3, label="series")
    ax.plot(ranks, np.polyval(quadratic, ranks), "-", label="quadratic fit")
    ax.set_xlabel("series rank")
    ax.set_ylabel("top-10% share")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_selection(targets: Sequence[float], chosen: Sequence[float], path, title: str = ""):
    ranks = np.arange(1, len(targets) + 1)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(ranks, targets, "-", color="grey", label="target")
    ax.plot(ranks, chosen, "o", label="selected series")
    ax.set_xlabel("rank within institution")
    ax.set_ylabel("top-10% share")
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)
