"""Figures written next to the CSV reports.

Uses the object-oriented matplotlib API with the Agg canvas, so nothing
touches pyplot's global state and the PNG bytes are reproducible.
"""

from __future__ import annotations

from io import BytesIO
from typing import Mapping, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from haloslhe.hvs import StepEdgeSpec, SweepRow, column_profile
from haloslhe.imaging import ImagePlane

_PNG_META = {"Software": None}


def _style(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.grid(True, lw=0.4, alpha=0.5)


def _png(fig: Figure) -> bytes:
    FigureCanvasAgg(fig)
    buf = BytesIO()
    fig.savefig(buf, format="png", dpi=110, metadata=_PNG_META)
    return buf.getvalue()


def profile_figure(planes: Mapping[str, ImagePlane], spec: StepEdgeSpec,
                   window: int | None = None) -> bytes:
    """Column-mean profiles around the edge, one line per labelled plane."""
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.add_subplot(111)
    e = spec.edge_column
    half = window or max(8, spec.width // 4)
    lo, hi = max(0, e - half), min(spec.width, e + half)
    cols = np.arange(lo, hi)
    for label, plane in planes.items():
        ax.plot(cols, column_profile(plane)[lo:hi], lw=1.2, label=label)
    ax.axvline(e - 0.5, color="0.4", ls=":", lw=0.8)
    ax.set_xlabel("column")
    ax.set_ylabel("level (0-1023)")
    ax.set_title(f"step {spec.dark_level:g}/{spec.bright_level:g}, edge at column {e}")
    ax.legend(frameon=False, fontsize=8)
    _style(ax)
    fig.tight_layout()
    return _png(fig)


def sweep_figure(rows: Sequence[SweepRow]) -> bytes:
    """Halo amplitudes per sweep row (uniform widths on a log axis)."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    uniform = [r for r in rows if r.policy == "uniform"]
    adaptive = [r for r in rows if r.policy != "uniform"]
    if uniform:
        s = [float(r.sigma) for r in uniform]
        ax.plot(s, [r.report.light_amp for r in uniform], "o-", label="light halo")
        ax.plot(s, [r.report.dark_amp for r in uniform], "s-", label="dark halo")
        ax.set_xscale("log")
        ax.set_xlabel("uniform tonal width (levels)")
    for r in adaptive:
        ax.axhline(r.report.light_amp, ls="--", lw=0.9, color="C0")
        ax.axhline(r.report.dark_amp, ls="--", lw=0.9, color="C1")
        ax.annotate(f"{r.policy} {r.sigma}", xy=(0.02, r.report.dark_amp),
                    xycoords=("axes fraction", "data"), fontsize=7, va="bottom")
    ax.set_ylabel("halo amplitude (levels)")
    ax.legend(frameon=False, fontsize=8)
    _style(ax)
    fig.tight_layout()
    return _png(fig)
