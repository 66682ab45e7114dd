"""Figure specs and deterministic rendering.

All figures are written as PNG with fixed geometry and stripped software
metadata, so re-rendering identical inputs yields byte-identical files.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import (
    SchemaError,
    column,
    read_csv,
    read_manifest_events,
    spectrum_columns,
)

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": None}}


class FigureKind(enum.Enum):
    EIGEN_SCATTER = "eigen_scatter"
    TIMESERIES_PANEL = "timeseries_panel"
    TRANSITION_OVERLAY = "transition_overlay"


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: FigureKind
    output: str
    manifest: str | None = None
    title: str | None = None
    styling: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inputs:
            raise SchemaError("a figure needs at least one input CSV")


def render(spec: FigureSpec) -> Path:
    """Render the figure described by ``spec`` and return the output path."""
    if spec.kind is FigureKind.EIGEN_SCATTER:
        fig = _eigen_scatter(spec)
    elif spec.kind is FigureKind.TIMESERIES_PANEL:
        fig = _timeseries_panel(spec)
    else:
        fig = _transition_overlay(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KWARGS)
    plt.close(fig)
    return out


def _eigen_scatter(spec: FigureSpec):
    header, data = read_csv(spec.inputs[0])
    pairs = spectrum_columns(header)
    values = column(header, data, "value", spec.inputs[0])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if data.shape[0]:
        res = np.concatenate([data[:, i] for i, _ in pairs])
        ims = np.concatenate([data[:, j] for _, j in pairs])
        cval = np.tile(values, len(pairs))
        keep = np.isfinite(res) & np.isfinite(ims)
        sc = ax.scatter(res[keep], ims[keep], c=cval[keep], s=14,
                        cmap=spec.styling.get("cmap", "viridis"))
        fig.colorbar(sc, ax=ax, label="swept value")
    ax.axvline(0.0, color="crimson", lw=0.8, ls="--")
    ax.set_xlabel("Re λ (1/s)")
    ax.set_ylabel("Im λ (rad/s)")
    ax.set_title(spec.title or "Eigenvalue spectrum over the swept parameter")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


_PANEL_GROUPS = (
    ("Active power (W)", ("p_1", "p_2", "p_grid", "p_load")),
    ("Reactive power (VAr)", ("q_1", "q_2", "q_grid", "q_load")),
    ("PCC voltage (V L-L RMS)", ("v_pcc_rms_ll",)),
    ("Frequency (Hz)", ("frequency",)),
)


def _timeseries_panel(spec: FigureSpec):
    header, data = read_csv(spec.inputs[0])
    t = column(header, data, "t", spec.inputs[0])
    events = read_manifest_events(spec.manifest) if spec.manifest else []
    fig, axes = plt.subplots(4, 1, figsize=(7.5, 9.0), sharex=True)
    for ax, (label, names) in zip(axes, _PANEL_GROUPS):
        for name in names:
            y = column(header, data, name, spec.inputs[0])
            ax.plot(t, y, lw=1.0, label=name)
        for ev in events:
            ax.axvline(float(ev["t"]), color="gray", lw=0.8, ls=":")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        if len(names) > 1:
            ax.legend(loc="upper right", fontsize=7)
    axes[-1].set_xlabel("t (s)")
    axes[0].set_title(spec.title or "Scenario signals")
    fig.tight_layout()
    return fig


def _transition_overlay(spec: FigureSpec):
    fig, (ax_p, ax_q) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    for path in spec.inputs:
        header, data = read_csv(path)
        t = column(header, data, "t", path)
        label = Path(path).stem
        ax_p.plot(t, column(header, data, "p_1", path), lw=1.0, label=label)
        ax_q.plot(t, column(header, data, "q_1", path), lw=1.0, label=label)
    ax_p.set_ylabel("p_1 (W)")
    ax_q.set_ylabel("q_1 (VAr)")
    ax_q.set_xlabel("t (s)")
    ax_p.set_title(spec.title or "Islanding power recovery per filter constant")
    for ax in (ax_p, ax_q):
        ax.grid(True, alpha=0.3)
        ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    return fig
