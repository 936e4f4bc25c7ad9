"""Render transmittance results to figure files (PNG/PDF/SVG by suffix)."""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_STYLE = {
    "nonlocal": dict(color="tab:blue", ls="-", label="non-local product"),
    "pilotwave": dict(color="tab:orange", ls="--", label="localized-absorber coverage"),
    "classic": dict(color="tab:green", ls=":", label="classic 1 - g"),
    "closed_limit": dict(color="tab:red", ls="-.", label="closed-system limit e^{-g}"),
}


def _new_axes(nrows=1):
    fig = Figure(figsize=(7.0, 3.2 * nrows))
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows=nrows, sharex=True)
    return fig, axes


def save_curve_plot(curve, path, title=None):
    """Plot model transmittances (and the mass sum) against the spread grid."""
    fig, ax = _new_axes()
    for name, values in curve.values.items():
        ax.plot(curve.stdev_grid, values, **_STYLE[name])
    if curve.mass_sum is not None:
        ax2 = ax.twinx()
        ax2.plot(curve.stdev_grid, curve.mass_sum, color="0.6", lw=0.8)
        ax2.set_ylabel("mass sum S", color="0.5")
        ax2.set_ylim(-0.05, 1.05)
    ax.set_xscale("log")
    ax.set_xlabel("standard deviation (detector radii)")
    ax.set_ylabel("transmittance")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper left", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def save_single_plot(offsets, p_v, tr, path, title=None):
    """Plot tunnel probability and transmittance against the detector offset."""
    offsets = np.asarray(offsets)
    fig, (ax_p, ax_tr) = _new_axes(nrows=2)
    ax_p.plot(offsets, p_v, color="tab:blue")
    ax_p.set_ylabel("tunnel probability")
    ax_p.grid(True, alpha=0.3)
    ax_tr.plot(offsets, tr, color="tab:red")
    ax_tr.set_ylabel("transmittance")
    ax_tr.set_xlabel("detector offset (detector radii)")
    ax_tr.grid(True, alpha=0.3)
    if title:
        ax_p.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
