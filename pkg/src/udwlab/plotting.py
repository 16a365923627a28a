"""Minimal SVG line plots.  The CSV files are the contract; these are advisory."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["line_svg", "grid_svg"]

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _draw(ax, curves, band=None, logx=False, logy=False,
          xlabel="", ylabel="", title=""):
    if band is not None:
        x, lo, hi = band
        ax.fill_between(x, lo, hi, alpha=0.3, color="gold", label="noise band")
    for x, y, label, style in curves:
        ax.plot(x, y, style, label=label, linewidth=1.0, markersize=3)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=7)


def line_svg(path, curves, band=None, logx=False, logy=False,
             xlabel="", ylabel="", title=""):
    """curves: list of (x, y, label, matplotlib-style); band: (x, lo, hi) or None."""
    fig, ax = plt.subplots(figsize=(5, 3.2), dpi=100)
    _draw(ax, curves, band, logx, logy, xlabel, ylabel, title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def grid_svg(path, panels, nrows, ncols, xlabel="", ylabel=""):
    """panels: list of dicts with keys curves/band/title (row-major)."""
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 2.8 * nrows), dpi=100)
    axes = axes.ravel() if hasattr(axes, "ravel") else [axes]
    for ax, panel in zip(axes, panels):
        _draw(ax, panel.get("curves", []), panel.get("band"),
              panel.get("logx", False), panel.get("logy", False),
              xlabel, ylabel, panel.get("title", ""))
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
