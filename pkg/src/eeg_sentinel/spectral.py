"""Welch power spectral density and mains-band power extraction.

Power is reported per bin, not per Hz, scaled so that the sum over all
one-sided bins of a broadband signal matches its time-domain variance
(at the default 1 Hz resolution the two conventions coincide). A unit
sine on a bin center therefore carries total power 0.5 across its
window mainlobe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroError,
    BadResolutionError,
    BinNotRepresentableError,
    SeriesTooShortError,
    TooShortError,
)
from .recording import ChannelSeries

MIN_SEGMENT = 8


@dataclass
class PsdEstimate:
    """One-sided averaged periodogram for a single channel."""

    channel_name: str
    bin_hz: float
    power: np.ndarray
    segment_count: int

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.power.size) * self.bin_hz


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window w[k] = 0.5 * (1 - cos(2 pi k / n))."""
    if n < 2:
        raise TooShortError(f"Hann window needs n >= 2, got {n}")
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / n))


def welch_psd(
    series: ChannelSeries,
    resolution_hz: float = 1.0,
    overlap_fraction: float = 0.5,
) -> PsdEstimate:
    """Averaged modified periodogram with a periodic Hann window.

    The segment length is round(rate / resolution_hz); each segment has
    its mean removed, is windowed, and its magnitude-squared DFT is
    scaled by 1 / (segment_length * sum(w^2)) with all bins except DC
    and Nyquist doubled. Segments advance by hop =
    round(segment_length * (1 - overlap_fraction)).

    Raises SeriesTooShortError when the implied segment would be shorter
    than 8 samples, and BadResolutionError when a single segment would
    exceed the series length.
    """
    if resolution_hz <= 0:
        raise ValueError(f"resolution_hz must be positive, got {resolution_hz}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"overlap_fraction must lie in [0, 1), got {overlap_fraction}")
    n = series.samples.size
    seg_len = int(round(series.sample_rate_hz / resolution_hz))
    if seg_len < MIN_SEGMENT:
        raise SeriesTooShortError(
            f"channel {series.meta.name!r}: resolution {resolution_hz} Hz at "
            f"{series.sample_rate_hz} Hz implies a {seg_len}-sample segment (minimum {MIN_SEGMENT})"
        )
    if seg_len > n:
        raise BadResolutionError(
            f"channel {series.meta.name!r}: one {seg_len}-sample segment exceeds "
            f"the series length {n}"
        )
    hop = max(1, int(round(seg_len * (1.0 - overlap_fraction))))
    window = hann_window(seg_len)
    window_power = float(window @ window)

    accum = np.zeros(seg_len // 2 + 1)
    count = 0
    for start in range(0, n - seg_len + 1, hop):
        segment = series.samples[start : start + seg_len]
        tapered = (segment - segment.mean()) * window
        accum += np.abs(np.fft.rfft(tapered)) ** 2
        count += 1

    power = accum / (count * seg_len * window_power)
    if seg_len % 2 == 0:
        power[1:-1] *= 2.0  # last bin is Nyquist, kept single-sided as-is
    else:
        power[1:] *= 2.0
    return PsdEstimate(
        channel_name=series.meta.name,
        bin_hz=series.sample_rate_hz / seg_len,
        power=power,
        segment_count=count,
    )


def mains_level(psd: PsdEstimate, mains_hz: float) -> float:
    """Power in the bin at the mains frequency.

    The frequency must land on the bin grid (within 1e-9 bins) and at or
    below Nyquist; otherwise BinNotRepresentableError is raised.
    """
    if mains_hz < 0:
        raise BinNotRepresentableError(f"mains frequency must be nonnegative, got {mains_hz}")
    position = mains_hz / psd.bin_hz
    index = int(round(position))
    if abs(position - index) > 1e-9 or index >= psd.power.size:
        raise BinNotRepresentableError(
            f"{mains_hz} Hz is not a representable bin (grid {psd.bin_hz} Hz, "
            f"{psd.power.size} bins up to {(psd.power.size - 1) * psd.bin_hz} Hz)"
        )
    return float(psd.power[index])


def normalize_levels(levels: np.ndarray) -> np.ndarray:
    """Scale nonnegative levels by their maximum so the largest becomes 1.

    Raises AllZeroError when every level is zero.
    """
    arr = np.asarray(levels, dtype=np.float64)
    if arr.size == 0:
        raise AllZeroError("no levels to normalize")
    if np.any(arr < 0):
        raise ValueError("levels must be nonnegative")
    peak = float(arr.max())
    if peak <= 0.0:
        raise AllZeroError("all mains levels are zero; normalization undefined")
    return arr / peak
