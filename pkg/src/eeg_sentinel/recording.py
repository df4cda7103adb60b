"""Recording data model and directory-bundle serialization.

A recording bundles EEG channels at one rate with motion (accelerometer
and magnetometer) channels at a lower rate, plus optional device contact
quality traces and optional synthetic ground truth. On disk a recording
is a directory:

    manifest.json   rates, channel lists, optional free-form metadata
    eeg.csv         header row of channel names, one column per channel
    motion.csv      same layout at the motion rate
    quality.csv     optional, integer contact quality 0..4 per EEG channel
    ground_truth.json  optional, channel name -> failure-mode string

Sample values are written as decimal text with 17 significant digits so
a written bundle reloads bit-exactly. Motion channel names carry an
"A." (accelerometer) or "M." (magnetometer) prefix; the loader derives
the sensor group from that prefix because the manifest only stores name
and axis.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    BundleWriteError,
    LengthMismatchError,
    MalformedCsvError,
    MalformedManifestError,
    MissingFileError,
    NonFiniteSampleError,
    RateMismatchError,
)

BUNDLE_FORMAT_VERSION = 1

_fmt17 = "{:.17g}".format  # float64 -> text -> float64 is the identity at 17 digits


class ChannelGroup(str, Enum):
    EEG = "eeg"
    ACCELEROMETER = "accelerometer"
    MAGNETOMETER = "magnetometer"


class Axis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


_MOTION_PREFIXES = {
    "A.": ChannelGroup.ACCELEROMETER,
    "M.": ChannelGroup.MAGNETOMETER,
}


def motion_group_for_name(name: str) -> ChannelGroup:
    """Derive the sensor group of a motion channel from its name prefix."""
    for prefix, group in _MOTION_PREFIXES.items():
        if name.startswith(prefix):
            return group
    raise MalformedManifestError(
        f"cannot infer sensor group for motion channel {name!r}: "
        "expected an 'A.' (accelerometer) or 'M.' (magnetometer) prefix"
    )


@dataclass(frozen=True)
class ChannelMeta:
    """Identity of one channel: label, sensor group, axis for motion channels."""

    name: str
    group: ChannelGroup
    axis: Axis | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("channel name must be non-empty")
        if self.group is ChannelGroup.EEG:
            if self.axis is not None:
                raise ValueError(f"EEG channel {self.name!r} must not carry an axis")
        elif self.axis is None:
            raise ValueError(f"motion channel {self.name!r} must carry an axis")


@dataclass(eq=False)
class ChannelSeries:
    """One channel's samples at a fixed rate."""

    meta: ChannelMeta
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError(f"channel {self.meta.name!r}: samples must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"channel {self.meta.name!r}: sample rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            bad = int(np.flatnonzero(~np.isfinite(self.samples))[0])
            raise NonFiniteSampleError(
                f"channel {self.meta.name!r}: non-finite sample at index {bad}"
            )

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(eq=False)
class ContactQualitySeries:
    """Device-reported contact quality for one EEG channel, integers 0..4."""

    channel_name: str
    sample_rate_hz: float
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError(f"quality {self.channel_name!r}: values must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"quality {self.channel_name!r}: sample rate must be positive")
        if self.values.min() < 0 or self.values.max() > 4:
            raise ValueError(f"quality {self.channel_name!r}: values must lie in [0, 4]")


@dataclass(eq=False)
class Recording:
    """A multi-rate recording: EEG channels, motion channels, optional extras.

    Validation runs on construction: one rate per group, the EEG rate an
    integer multiple of the motion rate, equal lengths within a group,
    and group durations agreeing within one motion-sample period.
    """

    eeg: list[ChannelSeries]
    motion: list[ChannelSeries]
    quality: list[ContactQualitySeries] | None = None
    ground_truth: dict[str, str] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.eeg:
            raise ValueError("a recording needs at least one EEG channel")
        names: list[str] = []
        for series in self.eeg:
            if series.meta.group is not ChannelGroup.EEG:
                raise ValueError(f"channel {series.meta.name!r} listed under eeg has group {series.meta.group.value}")
            names.append(series.meta.name)
        for series in self.motion:
            if series.meta.group is ChannelGroup.EEG:
                raise ValueError(f"channel {series.meta.name!r} listed under motion has group eeg")
            if motion_group_for_name(series.meta.name) is not series.meta.group:
                raise ValueError(
                    f"motion channel {series.meta.name!r}: name prefix disagrees with group "
                    f"{series.meta.group.value} (bundles store the group in the prefix)"
                )
            names.append(series.meta.name)
        if len(set(names)) != len(names):
            raise ValueError("channel names must be unique across EEG and motion groups")

        rates = {s.sample_rate_hz for s in self.eeg}
        if len(rates) != 1:
            raise RateMismatchError(f"EEG channels carry mixed rates: {sorted(rates)}")
        lengths = {s.samples.size for s in self.eeg}
        if len(lengths) != 1:
            raise LengthMismatchError(f"EEG channels carry mixed lengths: {sorted(lengths)}")

        if self.motion:
            mrates = {s.sample_rate_hz for s in self.motion}
            if len(mrates) != 1:
                raise RateMismatchError(f"motion channels carry mixed rates: {sorted(mrates)}")
            mlengths = {s.samples.size for s in self.motion}
            if len(mlengths) != 1:
                raise LengthMismatchError(f"motion channels carry mixed lengths: {sorted(mlengths)}")
            ratio = self.eeg_rate_hz / self.motion_rate_hz
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise RateMismatchError(
                    f"EEG rate {self.eeg_rate_hz} Hz is not an integer multiple "
                    f"of motion rate {self.motion_rate_hz} Hz"
                )
            if abs(self.eeg[0].duration_s - self.motion[0].duration_s) > 1.0 / self.motion_rate_hz + 1e-9:
                raise LengthMismatchError(
                    f"EEG duration {self.eeg[0].duration_s} s and motion duration "
                    f"{self.motion[0].duration_s} s disagree by more than one motion sample"
                )

    @property
    def eeg_rate_hz(self) -> float:
        return self.eeg[0].sample_rate_hz

    @property
    def motion_rate_hz(self) -> float | None:
        return self.motion[0].sample_rate_hz if self.motion else None

    @property
    def eeg_channel_names(self) -> list[str]:
        return [s.meta.name for s in self.eeg]

    @property
    def motion_channel_names(self) -> list[str]:
        return [s.meta.name for s in self.motion]

    @property
    def duration_s(self) -> float:
        return self.eeg[0].duration_s


def recordings_equal(a: Recording, b: Recording) -> bool:
    """Field-by-field equality, exact on every sample value."""

    def series_equal(x: ChannelSeries, y: ChannelSeries) -> bool:
        return (
            x.meta == y.meta
            and x.sample_rate_hz == y.sample_rate_hz
            and np.array_equal(x.samples, y.samples)
        )

    if len(a.eeg) != len(b.eeg) or len(a.motion) != len(b.motion):
        return False
    if not all(series_equal(x, y) for x, y in zip(a.eeg, b.eeg)):
        return False
    if not all(series_equal(x, y) for x, y in zip(a.motion, b.motion)):
        return False
    if (a.quality is None) != (b.quality is None):
        return False
    if a.quality is not None and b.quality is not None:
        if len(a.quality) != len(b.quality):
            return False
        for qa, qb in zip(a.quality, b.quality):
            if (
                qa.channel_name != qb.channel_name
                or qa.sample_rate_hz != qb.sample_rate_hz
                or not np.array_equal(qa.values, qb.values)
            ):
                return False
    return a.ground_truth == b.ground_truth and a.metadata == b.metadata


# ---------------------------------------------------------------------------
# bundle reading


def _read_csv_rows(path: Path, expected_header: list[str]) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsvError(f"{path.name}: file is empty") from None
        if header != expected_header:
            raise MalformedCsvError(
                f"{path.name}: header {header!r} does not match manifest channels {expected_header!r}"
            )
        rows: list[list[str]] = []
        for index, row in enumerate(reader, start=1):
            if len(row) != len(expected_header):
                raise MalformedCsvError(
                    f"{path.name}: row {index} has {len(row)} cells, expected {len(expected_header)}"
                )
            rows.append(row)
    if not rows:
        raise MalformedCsvError(f"{path.name}: no data rows")
    return rows


def _parse_float_table(path: Path, rows: list[list[str]], names: list[str]) -> np.ndarray:
    try:
        table = np.array(rows, dtype=np.float64)
    except ValueError:
        # Slow path only to name the offending cell.
        for r, row in enumerate(rows, start=1):
            for c, cell in enumerate(row):
                try:
                    float(cell)
                except ValueError:
                    raise MalformedCsvError(
                        f"{path.name}: row {r}, column {names[c]!r}: cannot parse {cell!r}"
                    ) from None
        raise
    finite = np.isfinite(table)
    if not finite.all():
        r, c = np.argwhere(~finite)[0]
        raise NonFiniteSampleError(
            f"{path.name}: row {int(r) + 1}, column {names[int(c)]!r}: non-finite sample"
        )
    return table


def _require(manifest: dict, key: str, kind: type, path: Path):
    if key not in manifest:
        raise MalformedManifestError(f"{path.name}: missing key {key!r}")
    value = manifest[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise MalformedManifestError(f"{path.name}: key {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise MalformedManifestError(f"{path.name}: key {key!r} must be {kind.__name__}")
    return value


def load_bundle(path: str | Path) -> Recording:
    """Load a recording bundle directory.

    Raises MissingFileError, MalformedManifestError, MalformedCsvError,
    NonFiniteSampleError, RateMismatchError, or LengthMismatchError with
    the offending file (and row/column where applicable) named.
    """
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise MissingFileError(f"{root}: manifest.json not found")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedManifestError(f"manifest.json: {exc}") from None
    if not isinstance(manifest, dict):
        raise MalformedManifestError("manifest.json: top level must be an object")

    version = _require(manifest, "format_version", int, manifest_path)
    if version != BUNDLE_FORMAT_VERSION:
        raise MalformedManifestError(
            f"manifest.json: format_version {version} unsupported (expected {BUNDLE_FORMAT_VERSION})"
        )
    eeg_rate = _require(manifest, "eeg_rate_hz", float, manifest_path)
    motion_rate = _require(manifest, "motion_rate_hz", float, manifest_path)
    eeg_names = _require(manifest, "eeg_channels", list, manifest_path)
    motion_entries = _require(manifest, "motion_channels", list, manifest_path)
    if not eeg_names or not all(isinstance(n, str) for n in eeg_names):
        raise MalformedManifestError("manifest.json: eeg_channels must be a non-empty list of strings")

    motion_meta: list[ChannelMeta] = []
    for entry in motion_entries:
        if not isinstance(entry, dict) or "name" not in entry or "axis" not in entry:
            raise MalformedManifestError(
                "manifest.json: each motion channel must be an object with 'name' and 'axis'"
            )
        try:
            axis = Axis(entry["axis"])
        except ValueError:
            raise MalformedManifestError(
                f"manifest.json: motion channel {entry.get('name')!r} has invalid axis {entry['axis']!r}"
            ) from None
        motion_meta.append(ChannelMeta(str(entry["name"]), motion_group_for_name(str(entry["name"])), axis))

    metadata = manifest.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise MalformedManifestError("manifest.json: metadata must map strings to strings")

    eeg_path = root / "eeg.csv"
    if not eeg_path.is_file():
        raise MissingFileError(f"{root}: eeg.csv not found")
    motion_path = root / "motion.csv"
    if not motion_path.is_file():
        raise MissingFileError(f"{root}: motion.csv not found")

    eeg_table = _parse_float_table(eeg_path, _read_csv_rows(eeg_path, list(eeg_names)), list(eeg_names))
    eeg = [
        ChannelSeries(ChannelMeta(name, ChannelGroup.EEG), eeg_rate, eeg_table[:, i])
        for i, name in enumerate(eeg_names)
    ]

    motion: list[ChannelSeries] = []
    if motion_meta:
        motion_names = [m.name for m in motion_meta]
        motion_table = _parse_float_table(
            motion_path, _read_csv_rows(motion_path, motion_names), motion_names
        )
        motion = [
            ChannelSeries(meta, motion_rate, motion_table[:, i]) for i, meta in enumerate(motion_meta)
        ]

    quality: list[ContactQualitySeries] | None = None
    quality_path = root / "quality.csv"
    if "quality_rate_hz" in manifest:
        quality_rate = _require(manifest, "quality_rate_hz", float, manifest_path)
        if not quality_path.is_file():
            raise MissingFileError(f"{root}: quality.csv declared in manifest but not found")
        with quality_path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                qnames = next(reader)
            except StopIteration:
                raise MalformedCsvError("quality.csv: file is empty") from None
            qrows = list(reader)
        if not qnames:
            raise MalformedCsvError("quality.csv: empty header")
        values = np.empty((len(qrows), len(qnames)), dtype=np.int64)
        for r, row in enumerate(qrows, start=1):
            if len(row) != len(qnames):
                raise MalformedCsvError(
                    f"quality.csv: row {r} has {len(row)} cells, expected {len(qnames)}"
                )
            for c, cell in enumerate(row):
                try:
                    value = int(cell)
                except ValueError:
                    raise MalformedCsvError(
                        f"quality.csv: row {r}, column {qnames[c]!r}: cannot parse {cell!r}"
                    ) from None
                if not 0 <= value <= 4:
                    raise MalformedCsvError(
                        f"quality.csv: row {r}, column {qnames[c]!r}: value {value} outside [0, 4]"
                    )
                values[r - 1, c] = value
        quality = [
            ContactQualitySeries(name, quality_rate, values[:, i]) for i, name in enumerate(qnames)
        ]
    elif quality_path.is_file():
        raise MalformedManifestError("manifest.json: quality.csv present but quality_rate_hz missing")

    ground_truth: dict[str, str] | None = None
    gt_path = root / "ground_truth.json"
    if gt_path.is_file():
        try:
            ground_truth = json.loads(gt_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise MalformedManifestError(f"ground_truth.json: {exc}") from None
        if not isinstance(ground_truth, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in ground_truth.items()
        ):
            raise MalformedManifestError("ground_truth.json: must map channel names to strings")

    return Recording(eeg=eeg, motion=motion, quality=quality, ground_truth=ground_truth, metadata=dict(metadata))


# ---------------------------------------------------------------------------
# bundle writing


def _write_float_csv(path: Path, names: list[str], columns: list[np.ndarray]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(names)
        if columns:
            for row in zip(*columns):
                writer.writerow([_fmt17(v) for v in row])


def write_bundle(recording: Recording, path: str | Path) -> Path:
    """Write a recording as a bundle directory; returns the directory path.

    Output is deterministic: the same recording always produces the same
    bytes, and load_bundle(write_bundle(r)) reproduces r exactly.
    """
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)

        manifest: dict = {
            "format_version": BUNDLE_FORMAT_VERSION,
            "eeg_rate_hz": float(recording.eeg_rate_hz),
            # With no motion channels the motion rate is moot; keep the key
            # (schema requires it) at the EEG rate.
            "motion_rate_hz": float(
                recording.motion_rate_hz if recording.motion else recording.eeg_rate_hz
            ),
            "eeg_channels": recording.eeg_channel_names,
            "motion_channels": [
                {"name": s.meta.name, "axis": s.meta.axis.value} for s in recording.motion
            ],
        }
        if recording.quality is not None:
            rates = {q.sample_rate_hz for q in recording.quality}
            if len(rates) != 1:
                raise BundleWriteError(f"quality traces carry mixed rates: {sorted(rates)}")
            manifest["quality_rate_hz"] = float(rates.pop())
        if recording.metadata:
            manifest["metadata"] = dict(recording.metadata)
        (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

        _write_float_csv(root / "eeg.csv", recording.eeg_channel_names, [s.samples for s in recording.eeg])
        _write_float_csv(
            root / "motion.csv", recording.motion_channel_names, [s.samples for s in recording.motion]
        )

        if recording.quality is not None:
            with (root / "quality.csv").open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\r\n")
                writer.writerow([q.channel_name for q in recording.quality])
                for row in zip(*[q.values for q in recording.quality]):
                    writer.writerow([str(int(v)) for v in row])

        if recording.ground_truth is not None:
            (root / "ground_truth.json").write_text(
                json.dumps(recording.ground_truth, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
    except OSError as exc:
        raise BundleWriteError(f"{root}: {exc}") from None
    return root
