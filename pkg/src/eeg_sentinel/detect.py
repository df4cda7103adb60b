"""Channel-quality rules, verdicts, and report assembly.

Two independent evidence families feed the verdict:

* mains: per-channel power at the mains frequency, normalized to the
  maximum; the single highest channel is flagged MainsHigh and the
  lowest flag_count - 1 are flagged MainsLow, where flag_count =
  ceil(flag_fraction * channel count).
* loading plane: each EEG channel's mean cosine against the other EEG
  channels; below the anticorrelation threshold flags PcaAnticorrelated,
  and channels with no usable plane vector flag Degenerate.

A channel is failed when both families fire, suspect when exactly one
does, good otherwise. Motion coupling is reported for context but never
flags a channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidConfigError, TooFewChannelsError, UnknownChannelError
from .pca import CorrelationMap, PcaResult, correlation_map, loading_plane_vectors, svd_decompose
from .preprocess import FeatureMatrix, build_feature_matrix
from .recording import ContactQualitySeries, Recording
from .spectral import PsdEstimate, mains_level, normalize_levels, welch_psd

REPORT_FORMAT_VERSION = 1
MAINS_RESOLUTION_HZ = 1.0

_fmt17 = "{:.17g}".format


class ChannelFlag(str, Enum):
    MAINS_HIGH = "MainsHigh"
    MAINS_LOW = "MainsLow"
    PCA_ANTICORRELATED = "PcaAnticorrelated"
    DEGENERATE = "Degenerate"


class Verdict(str, Enum):
    GOOD = "good"
    SUSPECT = "suspect"
    FAILED = "failed"


_FLAG_ORDER = (
    ChannelFlag.MAINS_HIGH,
    ChannelFlag.MAINS_LOW,
    ChannelFlag.PCA_ANTICORRELATED,
    ChannelFlag.DEGENERATE,
)
_MAINS_FAMILY = {ChannelFlag.MAINS_HIGH, ChannelFlag.MAINS_LOW}
_PCA_FAMILY = {ChannelFlag.PCA_ANTICORRELATED, ChannelFlag.DEGENERATE}


@dataclass(frozen=True)
class DetectorConfig:
    flag_fraction: float = 0.25
    mains_hz: float = 50.0
    pca_anticorr_threshold: float = -0.3
    motion_coupling_threshold: float = 0.7   # reporting aid only; never flags
    motion_activity_min_std: float = 0.05    # raw motion std gate, device units
    components: tuple[int, int] = (0, 1)

    def validate(self) -> None:
        if not 0.0 < self.flag_fraction < 1.0:
            raise InvalidConfigError(f"flag_fraction must lie in (0, 1), got {self.flag_fraction}")
        if float(self.mains_hz) not in (50.0, 60.0):
            raise InvalidConfigError(f"mains_hz must be 50 or 60, got {self.mains_hz}")
        if not -1.0 <= self.pca_anticorr_threshold <= 1.0:
            raise InvalidConfigError("pca_anticorr_threshold must lie in [-1, 1]")
        if not 0.0 <= self.motion_coupling_threshold <= 1.0:
            raise InvalidConfigError("motion_coupling_threshold must lie in [0, 1]")
        if self.motion_activity_min_std < 0:
            raise InvalidConfigError("motion_activity_min_std must be nonnegative")
        if len(self.components) != 2 or any(int(c) != c or c < 0 for c in self.components):
            raise InvalidConfigError(f"components must be two nonnegative indices, got {self.components!r}")


@dataclass
class ChannelVerdict:
    channel_name: str
    mains_level_normalized: float
    pca_mean_corr: float | None
    motion_coupling: float | None
    flags: frozenset[ChannelFlag]
    verdict: Verdict


@dataclass
class MotionNullSummary:
    mean_abs_coupling: float
    max_abs_coupling: float


@dataclass
class ChannelQualityReport:
    channels: list[ChannelVerdict]
    motion_analysis_performed: bool
    motion_null_summary: MotionNullSummary | None
    config: DetectorConfig
    recording_metadata: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        """Serialize with a fixed key order and 17-significant-digit reals."""

        def real(x: float) -> str:
            return _fmt17(float(x))

        def opt(x: float | None) -> str:
            return "null" if x is None else real(x)

        cfg = self.config
        lines = [
            "{",
            f'  "format_version": {REPORT_FORMAT_VERSION},',
            '  "config": {',
            f'    "flag_fraction": {real(cfg.flag_fraction)},',
            f'    "mains_hz": {real(cfg.mains_hz)},',
            f'    "pca_anticorr_threshold": {real(cfg.pca_anticorr_threshold)},',
            f'    "motion_coupling_threshold": {real(cfg.motion_coupling_threshold)},',
            f'    "motion_activity_min_std": {real(cfg.motion_activity_min_std)},',
            f'    "components": [{int(cfg.components[0])}, {int(cfg.components[1])}]',
            "  },",
            f'  "motion_analysis_performed": {"true" if self.motion_analysis_performed else "false"},',
        ]
        if self.motion_null_summary is None:
            lines.append('  "motion_null_summary": null,')
        else:
            lines.append(
                '  "motion_null_summary": {'
                f'"mean_abs_coupling": {real(self.motion_null_summary.mean_abs_coupling)}, '
                f'"max_abs_coupling": {real(self.motion_null_summary.max_abs_coupling)}'
                "},"
            )
        lines.append('  "channels": [')
        for i, ch in enumerate(self.channels):
            flags = ", ".join(json.dumps(f.value) for f in _FLAG_ORDER if f in ch.flags)
            comma = "," if i + 1 < len(self.channels) else ""
            lines.append(
                "    {"
                f'"name": {json.dumps(ch.channel_name)}, '
                f'"mains_level_normalized": {real(ch.mains_level_normalized)}, '
                f'"pca_mean_corr": {opt(ch.pca_mean_corr)}, '
                f'"motion_coupling": {opt(ch.motion_coupling)}, '
                f'"flags": [{flags}], '
                f'"verdict": {json.dumps(ch.verdict.value)}'
                "}" + comma
            )
        lines.append("  ],")
        meta = json.dumps(self.recording_metadata, sort_keys=True)
        lines.append(f'  "recording_metadata": {meta}')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ChannelQualityReport":
        payload = json.loads(text)
        if payload.get("format_version") != REPORT_FORMAT_VERSION:
            raise ValueError(f"unsupported report format_version {payload.get('format_version')!r}")
        cfg = payload["config"]
        config = DetectorConfig(
            flag_fraction=float(cfg["flag_fraction"]),
            mains_hz=float(cfg["mains_hz"]),
            pca_anticorr_threshold=float(cfg["pca_anticorr_threshold"]),
            motion_coupling_threshold=float(cfg["motion_coupling_threshold"]),
            motion_activity_min_std=float(cfg["motion_activity_min_std"]),
            components=(int(cfg["components"][0]), int(cfg["components"][1])),
        )
        summary = payload["motion_null_summary"]
        null_summary = (
            None
            if summary is None
            else MotionNullSummary(float(summary["mean_abs_coupling"]), float(summary["max_abs_coupling"]))
        )
        channels = [
            ChannelVerdict(
                channel_name=ch["name"],
                mains_level_normalized=float(ch["mains_level_normalized"]),
                pca_mean_corr=None if ch["pca_mean_corr"] is None else float(ch["pca_mean_corr"]),
                motion_coupling=None if ch["motion_coupling"] is None else float(ch["motion_coupling"]),
                flags=frozenset(ChannelFlag(f) for f in ch["flags"]),
                verdict=Verdict(ch["verdict"]),
            )
            for ch in payload["channels"]
        ]
        return cls(
            channels=channels,
            motion_analysis_performed=bool(payload["motion_analysis_performed"]),
            motion_null_summary=null_summary,
            config=config,
            recording_metadata=dict(payload.get("recording_metadata", {})),
        )


def flag_count_for(flag_fraction: float, channel_count: int) -> int:
    # Epsilon-guarded ceiling: 0.1 * 10 must count as 1, not 2.
    return math.ceil(flag_fraction * channel_count - 1e-9)


def mains_flag_channels(
    levels_normalized: Sequence[float] | np.ndarray, config: DetectorConfig
) -> list[set[ChannelFlag]]:
    """Assign MainsHigh to the maximum channel and MainsLow to the
    flag_count - 1 lowest of the rest; ties break toward the lower index."""
    levels = np.asarray(levels_normalized, dtype=np.float64)
    n = levels.size
    count = flag_count_for(config.flag_fraction, n)
    if n == 0 or n < count:
        raise TooFewChannelsError(f"{n} channels cannot carry {count} flags")
    flags: list[set[ChannelFlag]] = [set() for _ in range(n)]
    high = int(np.argmax(levels))  # first maximum wins ties
    flags[high].add(ChannelFlag.MAINS_HIGH)
    if count > 1:
        order = np.argsort(levels, kind="stable")  # stable: equal values keep index order
        lows = [int(i) for i in order if int(i) != high][: count - 1]
        for i in lows:
            flags[i].add(ChannelFlag.MAINS_LOW)
    return flags


def pca_flag_channels(
    eeg_map: CorrelationMap, config: DetectorConfig
) -> tuple[list[set[ChannelFlag]], list[float | None]]:
    """Per-channel flags and mean off-diagonal correlation over the
    EEG-restricted map. Degenerate channels get the Degenerate flag and
    no mean (their entries are zeroed, not meaningful)."""
    n = len(eeg_map.channel_names)
    degenerate = set(eeg_map.degenerate_channels)
    flags: list[set[ChannelFlag]] = [set() for _ in range(n)]
    means: list[float | None] = [None] * n
    for i, name in enumerate(eeg_map.channel_names):
        if name in degenerate:
            flags[i].add(ChannelFlag.DEGENERATE)
            continue
        if n < 2:
            continue
        row = eeg_map.values[i]
        mean = float((row.sum() - row[i]) / (n - 1))
        means[i] = mean
        if mean < config.pca_anticorr_threshold:
            flags[i].add(ChannelFlag.PCA_ANTICORRELATED)
    return flags, means


def motion_coupling(
    cmap: CorrelationMap, eeg_names: Sequence[str], motion_names: Sequence[str]
) -> np.ndarray:
    """Mean |cosine| between each EEG channel and the motion channels."""
    index = {name: i for i, name in enumerate(cmap.channel_names)}
    for name in list(eeg_names) + list(motion_names):
        if name not in index:
            raise UnknownChannelError(f"channel {name!r} not present in the correlation map")
    if not motion_names:
        raise ValueError("motion_names must be non-empty")
    eeg_idx = np.array([index[n] for n in eeg_names], dtype=int)
    motion_idx = np.array([index[n] for n in motion_names], dtype=int)
    return np.abs(cmap.values[np.ix_(eeg_idx, motion_idx)]).mean(axis=1)


def verdict_from_flags(flags: set[ChannelFlag] | frozenset[ChannelFlag]) -> Verdict:
    mains = bool(_MAINS_FAMILY & set(flags))
    plane = bool(_PCA_FAMILY & set(flags))
    if mains and plane:
        return Verdict.FAILED
    if mains or plane:
        return Verdict.SUSPECT
    return Verdict.GOOD


@dataclass
class AnalysisArtifacts:
    """Everything the pipeline computes, for callers that want more than
    the report (matrix/figure emission, inspection)."""

    report: ChannelQualityReport
    feature_matrix: FeatureMatrix
    pca: PcaResult
    plane_vectors: np.ndarray
    map: CorrelationMap
    psds: list[PsdEstimate]
    mains_levels: np.ndarray
    mains_levels_normalized: np.ndarray


def analyze_recording(recording: Recording, config: DetectorConfig | None = None) -> AnalysisArtifacts:
    """Run the full pipeline and keep the intermediates."""
    config = config or DetectorConfig()
    config.validate()

    features = build_feature_matrix(recording)
    decomposition = svd_decompose(features)
    vectors = loading_plane_vectors(decomposition, config.components)
    cmap = correlation_map(vectors, features.channel_names)

    eeg_names = recording.eeg_channel_names
    pca_flags, pca_means = pca_flag_channels(cmap.restrict(eeg_names), config)

    psds = [welch_psd(s, MAINS_RESOLUTION_HZ) for s in recording.eeg]
    levels = np.array([mains_level(p, config.mains_hz) for p in psds])
    normalized = normalize_levels(levels)
    mains_flags = mains_flag_channels(normalized, config)

    def active(samples: np.ndarray) -> bool:
        return samples.size >= 2 and float(samples.std(ddof=1)) > config.motion_activity_min_std

    motion_names = recording.motion_channel_names
    perform_motion = bool(motion_names) and any(active(s.samples) for s in recording.motion)
    couplings: np.ndarray | None = None
    summary: MotionNullSummary | None = None
    if perform_motion:
        couplings = motion_coupling(cmap, eeg_names, motion_names)
        summary = MotionNullSummary(
            mean_abs_coupling=float(np.mean(np.abs(couplings))),
            max_abs_coupling=float(np.max(np.abs(couplings))),
        )

    channels: list[ChannelVerdict] = []
    for i, name in enumerate(eeg_names):
        flags = frozenset(mains_flags[i] | pca_flags[i])
        channels.append(
            ChannelVerdict(
                channel_name=name,
                mains_level_normalized=float(normalized[i]),
                pca_mean_corr=pca_means[i],
                motion_coupling=float(couplings[i]) if couplings is not None else None,
                flags=flags,
                verdict=verdict_from_flags(flags),
            )
        )

    report = ChannelQualityReport(
        channels=channels,
        motion_analysis_performed=perform_motion,
        motion_null_summary=summary,
        config=config,
        recording_metadata=dict(recording.metadata),
    )
    return AnalysisArtifacts(
        report=report,
        feature_matrix=features,
        pca=decomposition,
        plane_vectors=vectors,
        map=cmap,
        psds=psds,
        mains_levels=levels,
        mains_levels_normalized=normalized,
    )


def assess(recording: Recording, config: DetectorConfig | None = None) -> ChannelQualityReport:
    """Analyze a recording and return its channel-quality report."""
    return analyze_recording(recording, config).report


@dataclass
class ChannelAgreement:
    channel_name: str
    device_failed: bool
    detector_failed: bool


@dataclass
class QualityComparison:
    true_positive: int
    false_positive: int
    false_negative: int
    true_negative: int
    per_channel: list[ChannelAgreement]


def compare_with_device_quality(
    report: ChannelQualityReport,
    quality: Sequence[ContactQualitySeries],
    device_failed_max_quality: int = 1,
) -> QualityComparison:
    """Confusion counts between the detector (verdict != good) and the
    device's contact quality (time-median <= cutoff, default 1)."""
    medians = {q.channel_name: float(np.median(q.values)) for q in quality}
    per_channel: list[ChannelAgreement] = []
    tp = fp = fn = tn = 0
    for ch in report.channels:
        if ch.channel_name not in medians:
            raise UnknownChannelError(
                f"no contact-quality trace for report channel {ch.channel_name!r}"
            )
        device_failed = medians[ch.channel_name] <= device_failed_max_quality
        detector_failed = ch.verdict is not Verdict.GOOD
        per_channel.append(ChannelAgreement(ch.channel_name, device_failed, detector_failed))
        if device_failed and detector_failed:
            tp += 1
        elif device_failed:
            fn += 1
        elif detector_failed:
            fp += 1
        else:
            tn += 1
    return QualityComparison(tp, fp, fn, tn, per_channel)
