"""PNG figures for CLI runs. Imported only when plots are requested."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed metadata keeps PNG bytes stable between runs.
_METADATA = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_curves(path: Path, x, curves: dict, *, xlabel: str, ylabel: str, title: str = "") -> Path:
    """One line per labelled curve against a shared x axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in curves.items():
        ax.plot(x, y, lw=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    return _save(fig, path)


def plot_traces(path: Path, traces: dict, *, xlabel: str, ylabel: str, title: str = "") -> Path:
    """Like plot_curves but each label carries its own (x, y) pair."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in traces.items():
        ax.plot(x, y, lw=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_errorbars(path: Path, x, y, err, *, xlabel: str, ylabel: str, logx: bool = False,
                   logy: bool = False, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(x, y, yerr=err, fmt="o-", capsize=3)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)
