"""Failed-channel detection for multi-rate wireless EEG recordings.

The pipeline assembles a common-rate z-scored matrix from EEG and
motion channels, places every channel in a two-component loading plane,
and combines loading-plane anticorrelation with mains-band (50/60 Hz)
power to classify each EEG channel as good, suspect, or failed. A
seeded synthetic generator with injectable channel failures provides
ground truth for validation.
"""

from .detect import (
    AnalysisArtifacts,
    ChannelFlag,
    ChannelQualityReport,
    ChannelVerdict,
    DetectorConfig,
    MotionNullSummary,
    QualityComparison,
    Verdict,
    analyze_recording,
    assess,
    compare_with_device_quality,
    flag_count_for,
    mains_flag_channels,
    motion_coupling,
    pca_flag_channels,
    verdict_from_flags,
)
from .errors import SentinelError
from .pca import (
    CorrelationMap,
    PcaResult,
    correlation_map,
    loading_plane_vectors,
    svd_decompose,
)
from .preprocess import FeatureMatrix, build_feature_matrix, decimate, zscore
from .recording import (
    Axis,
    ChannelGroup,
    ChannelMeta,
    ChannelSeries,
    ContactQualitySeries,
    Recording,
    load_bundle,
    recordings_equal,
    write_bundle,
)
from .spectral import PsdEstimate, hann_window, mains_level, normalize_levels, welch_psd
from .synth import Activity, FailureKind, FailureMode, SynthConfig, generate, inject_failure

__version__ = "0.1.0"

__all__ = [
    "Activity",
    "AnalysisArtifacts",
    "Axis",
    "ChannelFlag",
    "ChannelGroup",
    "ChannelMeta",
    "ChannelQualityReport",
    "ChannelSeries",
    "ChannelVerdict",
    "ContactQualitySeries",
    "CorrelationMap",
    "DetectorConfig",
    "FailureKind",
    "FailureMode",
    "FeatureMatrix",
    "MotionNullSummary",
    "PcaResult",
    "PsdEstimate",
    "QualityComparison",
    "Recording",
    "SentinelError",
    "SynthConfig",
    "Verdict",
    "analyze_recording",
    "assess",
    "build_feature_matrix",
    "compare_with_device_quality",
    "flag_count_for",
    "correlation_map",
    "decimate",
    "generate",
    "hann_window",
    "inject_failure",
    "load_bundle",
    "loading_plane_vectors",
    "mains_flag_channels",
    "mains_level",
    "motion_coupling",
    "normalize_levels",
    "pca_flag_channels",
    "recordings_equal",
    "svd_decompose",
    "verdict_from_flags",
    "welch_psd",
    "write_bundle",
    "zscore",
]
