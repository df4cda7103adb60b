"""Common-rate, z-scored feature matrix assembly.

EEG channels are block-mean decimated down to the motion rate, every
channel is truncated to a common row count, and each column is z-scored
(sample std, N-1 divisor). Constant columns cannot be z-scored; they are
zeroed and reported as degenerate rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FactorTooLargeError, TooShortError
from .recording import Axis, ChannelGroup, ChannelSeries, Recording

DEGENERATE_STD = 1e-12

_AXIS_ORDER = {Axis.X: 0, Axis.Y: 1, Axis.Z: 2}


@dataclass
class FeatureMatrix:
    """Time-by-channel matrix of z-scored columns at one rate."""

    values: np.ndarray
    channel_names: list[str]
    groups: list[ChannelGroup]
    sample_rate_hz: float
    degenerate_channels: list[str]


def decimate(series: ChannelSeries, factor: int) -> ChannelSeries:
    """Reduce the rate by an integer factor using non-overlapping block means.

    A trailing partial block is discarded. factor 1 returns a copy.
    """
    if int(factor) != factor or factor < 1:
        raise ValueError(f"decimation factor must be a positive integer, got {factor!r}")
    factor = int(factor)
    n = series.samples.size
    if factor > n:
        raise FactorTooLargeError(
            f"channel {series.meta.name!r}: factor {factor} exceeds length {n}"
        )
    kept = (n // factor) * factor
    means = series.samples[:kept].reshape(-1, factor).mean(axis=1)
    return ChannelSeries(series.meta, series.sample_rate_hz / factor, means)


def zscore(samples: np.ndarray) -> tuple[np.ndarray, bool]:
    """Center and scale to unit sample std; returns (values, degenerate).

    Degenerate means std < 1e-12: the output is all zeros and the flag is
    True, so constant channels flow through instead of dividing by zero.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise TooShortError(f"z-score needs at least 2 samples, got {x.size}")
    std = float(x.std(ddof=1))
    if std < DEGENERATE_STD:
        return np.zeros_like(x), True
    return (x - x.mean()) / std, False


def build_feature_matrix(recording: Recording) -> FeatureMatrix:
    """Assemble the analysis matrix: EEG columns first (recording order),
    then accelerometer X, Y, Z, then magnetometer X, Y, Z."""
    if recording.motion:
        factor = int(round(recording.eeg_rate_hz / recording.motion_rate_hz))
        rate = recording.motion_rate_hz
    else:
        factor = 1
        rate = recording.eeg_rate_hz

    ordered: list[ChannelSeries] = list(recording.eeg)
    for group in (ChannelGroup.ACCELEROMETER, ChannelGroup.MAGNETOMETER):
        members = [s for s in recording.motion if s.meta.group is group]
        members.sort(key=lambda s: _AXIS_ORDER[s.meta.axis])
        ordered.extend(members)

    columns = [
        decimate(s, factor).samples if s.meta.group is ChannelGroup.EEG else s.samples
        for s in ordered
    ]
    rows = min(c.size for c in columns)

    names: list[str] = []
    groups: list[ChannelGroup] = []
    degenerate: list[str] = []
    scored: list[np.ndarray] = []
    # Truncate to the common row count before z-scoring so every
    # non-constant column ends up with exactly zero mean and unit std.
    for series, column in zip(ordered, columns):
        z, bad = zscore(column[:rows])
        scored.append(z)
        names.append(series.meta.name)
        groups.append(series.meta.group)
        if bad:
            degenerate.append(series.meta.name)

    return FeatureMatrix(
        values=np.column_stack(scored),
        channel_names=names,
        groups=groups,
        sample_rate_hz=rate,
        degenerate_channels=degenerate,
    )
