"""Matplotlib figure rendering for analysis reports.

Figures are built on explicit Figure objects (no pyplot state) and
saved as PNG with fixed metadata and dpi, so repeated renders of the
same analysis produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

from .detect import AnalysisArtifacts, ChannelFlag
from .pca import CorrelationMap
from .recording import ChannelGroup
from .spectral import PsdEstimate

_DPI = 150
_PNG_METADATA = {"Software": "eeg-sentinel"}

_GROUP_COLORS = {
    ChannelGroup.EEG: "tab:blue",
    ChannelGroup.ACCELEROMETER: "tab:green",
    ChannelGroup.MAGNETOMETER: "tab:red",
}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    return path


def save_correlation_map_figure(cmap: CorrelationMap, path: str | Path) -> Path:
    n = len(cmap.channel_names)
    fig = Figure(figsize=(0.45 * n + 2.2, 0.45 * n + 1.6), layout="constrained")
    ax = fig.subplots()
    image = ax.imshow(cmap.values, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(n), cmap.channel_names, rotation=90, fontsize=7)
    ax.set_yticks(range(n), cmap.channel_names, fontsize=7)
    ax.set_title("Loading-plane correlation")
    fig.colorbar(image, ax=ax, shrink=0.8, label="cosine")
    return _save(fig, Path(path))


def save_mains_levels_figure(
    names: Sequence[str],
    normalized: Sequence[float],
    flags: Sequence[frozenset[ChannelFlag] | set[ChannelFlag]],
    mains_hz: float,
    path: str | Path,
) -> Path:
    colors = []
    for flagset in flags:
        if ChannelFlag.MAINS_HIGH in flagset:
            colors.append("tab:red")
        elif ChannelFlag.MAINS_LOW in flagset:
            colors.append("tab:orange")
        else:
            colors.append("tab:gray")
    fig = Figure(figsize=(0.5 * len(names) + 1.5, 3.4), layout="constrained")
    ax = fig.subplots()
    ax.bar(range(len(names)), list(normalized), color=colors)
    ax.set_xticks(range(len(names)), names, rotation=90, fontsize=8)
    ax.set_ylabel(f"{mains_hz:g} Hz level (normalized)")
    ax.set_title("Mains interference by channel")
    ax.set_ylim(0.0, 1.05)
    return _save(fig, Path(path))


def save_loading_plane_figure(
    vectors: np.ndarray,
    names: Sequence[str],
    groups: Sequence[ChannelGroup],
    path: str | Path,
) -> Path:
    fig = Figure(figsize=(5.5, 5.0), layout="constrained")
    ax = fig.subplots()
    seen: set[str] = set()
    for (x, y), name, group in zip(vectors, names, groups):
        color = _GROUP_COLORS[group]
        label = group.value if group.value not in seen else None
        seen.add(group.value)
        ax.plot([0.0, x], [0.0, y], color=color, linewidth=0.8, alpha=0.6)
        ax.scatter([x], [y], color=color, s=18, label=label)
        ax.annotate(name, (x, y), fontsize=7, textcoords="offset points", xytext=(3, 3))
    ax.axhline(0.0, color="0.85", linewidth=0.8, zorder=0)
    ax.axvline(0.0, color="0.85", linewidth=0.8, zorder=0)
    ax.set_xlabel("component i loading")
    ax.set_ylabel("component j loading")
    ax.set_title("Channels in the loading plane")
    ax.set_aspect("equal")
    ax.legend(fontsize=8, loc="best")
    return _save(fig, Path(path))


def save_psd_figure(psds: Sequence[PsdEstimate], mains_hz: float | None, path: str | Path) -> Path:
    fig = Figure(figsize=(7.0, 4.0), layout="constrained")
    ax = fig.subplots()
    positive = False
    for psd in psds:
        ax.plot(psd.frequencies, psd.power, linewidth=0.9, label=psd.channel_name)
        positive = positive or bool(np.any(psd.power > 0))
    if positive:
        ax.set_yscale("log")
        floor = min(float(p.power[p.power > 0].min()) for p in psds if np.any(p.power > 0))
        ax.set_ylim(bottom=floor * 0.5)
    if mains_hz is not None:
        ax.axvline(mains_hz, color="tab:red", linewidth=0.8, linestyle="--", label=f"{mains_hz:g} Hz")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power per bin")
    ax.set_title("Welch spectra")
    if len(psds) <= 16:
        ax.legend(fontsize=7, ncols=2)
    return _save(fig, Path(path))


def render_report_figures(directory: str | Path, artifacts: AnalysisArtifacts) -> list[Path]:
    """Render the standard report figures next to the delimited output:
    correlation map, mains levels, loading plane, and a PSD overview."""
    root = Path(directory)
    report = artifacts.report
    names = [ch.channel_name for ch in report.channels]
    flags = [ch.flags for ch in report.channels]
    return [
        save_correlation_map_figure(artifacts.map, root / "correlation_map.png"),
        save_mains_levels_figure(
            names, artifacts.mains_levels_normalized, flags, report.config.mains_hz,
            root / "mains_levels.png",
        ),
        save_loading_plane_figure(
            artifacts.plane_vectors,
            artifacts.feature_matrix.channel_names,
            artifacts.feature_matrix.groups,
            root / "loading_plane.png",
        ),
        save_psd_figure(artifacts.psds, report.config.mains_hz, root / "psd_overview.png"),
    ]
