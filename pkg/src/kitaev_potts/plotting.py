"""Figures for the CLI report path; always rendered off-screen to files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def line_plot(path, x, curves, xlabel, ylabel, title=None, vlines=(), inset=None, ylim=None, inset_loc=(0.58, 0.12)):
    """curves: {label: y}; vlines: x positions to mark; inset: (x, {label: y}, ylabel)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, y in curves.items():
            ax.plot(x, y, label=label)
        for v in vlines:
            ax.axvline(v, color="0.4", ls="--", lw=0.8)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if ylim is not None:
            ax.set_ylim(*ylim)
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend(frameon=False)
        if inset is not None:
            ix, icurves, ilabel = inset
            sub = ax.inset_axes([*inset_loc, 0.38, 0.36])
            for label, y in icurves.items():
                sub.plot(ix, y, lw=1.0)
            sub.set_ylabel(ilabel, fontsize=7)
            sub.tick_params(labelsize=6)
        return _save(fig, path)


def scatter_plot(path, x, y, xlabel, ylabel, title=None, logx=False, logy=False, fit=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(x, y, "o", ms=4)
        if fit is not None:
            ax.plot(*fit, "-", lw=1.0, color="C1")
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def bar_plot(path, labels, values, ylabel, title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(range(len(values)), values, tick_label=[str(v) for v in labels])
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        return _save(fig, path)
