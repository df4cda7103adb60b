"""Delimited-text emission for correlation maps, mains levels, and spectra.

Writers and readers are paired so every emitted file re-parses under
this module; values use 17 significant digits and round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import MalformedCsvError
from .pca import CorrelationMap
from .spectral import PsdEstimate

_fmt17 = "{:.17g}".format


def _writer(stream: TextIO) -> "csv.writer":
    return csv.writer(stream, lineterminator="\r\n")


def write_correlation_map(stream: TextIO, cmap: CorrelationMap) -> None:
    out = _writer(stream)
    out.writerow(["channel"] + list(cmap.channel_names))
    for name, row in zip(cmap.channel_names, cmap.values):
        out.writerow([name] + [_fmt17(v) for v in row])


def read_correlation_map(stream: TextIO) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(stream))
    if not rows or rows[0][:1] != ["channel"]:
        raise MalformedCsvError("correlation map: expected a 'channel' header column")
    names = rows[0][1:]
    if len(rows) - 1 != len(names):
        raise MalformedCsvError(
            f"correlation map: {len(rows) - 1} rows for {len(names)} channels"
        )
    values = np.empty((len(names), len(names)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(names) + 1 or row[0] != names[i]:
            raise MalformedCsvError(f"correlation map: bad row {i + 1}")
        values[i] = [float(cell) for cell in row[1:]]
    return names, values


def write_mains_levels(
    stream: TextIO, names: Sequence[str], levels: Iterable[float], normalized: Iterable[float]
) -> None:
    out = _writer(stream)
    out.writerow(["channel", "level", "level_normalized"])
    for name, level, norm in zip(names, levels, normalized):
        out.writerow([name, _fmt17(level), _fmt17(norm)])


def read_mains_levels(stream: TextIO) -> tuple[list[str], np.ndarray, np.ndarray]:
    rows = list(csv.reader(stream))
    if not rows or rows[0] != ["channel", "level", "level_normalized"]:
        raise MalformedCsvError("mains levels: unexpected header")
    names = [row[0] for row in rows[1:]]
    levels = np.array([float(row[1]) for row in rows[1:]])
    normalized = np.array([float(row[2]) for row in rows[1:]])
    return names, levels, normalized


def write_psd(stream: TextIO, psd: PsdEstimate) -> None:
    out = _writer(stream)
    out.writerow(["freq_hz", "power"])
    for freq, power in zip(psd.frequencies, psd.power):
        out.writerow([_fmt17(freq), _fmt17(power)])


def read_psd(stream: TextIO) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.reader(stream))
    if not rows or rows[0] != ["freq_hz", "power"]:
        raise MalformedCsvError("psd: unexpected header")
    freq = np.array([float(row[0]) for row in rows[1:]])
    power = np.array([float(row[1]) for row in rows[1:]])
    return freq, power


def safe_filename(name: str) -> str:
    """Channel label to a filesystem-safe fragment."""
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def emit_matrices(directory: str | Path, artifacts) -> list[Path]:
    """Write correlation_map.csv, mains_levels.csv, and one
    psd_<channel>.csv per EEG channel; returns the written paths."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = root / "correlation_map.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        write_correlation_map(fh, artifacts.map)
    written.append(path)

    path = root / "mains_levels.csv"
    names = [ch.channel_name for ch in artifacts.report.channels]
    with path.open("w", newline="", encoding="utf-8") as fh:
        write_mains_levels(fh, names, artifacts.mains_levels, artifacts.mains_levels_normalized)
    written.append(path)

    for psd in artifacts.psds:
        path = root / f"psd_{safe_filename(psd.channel_name)}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            write_psd(fh, psd)
        written.append(path)
    return written
