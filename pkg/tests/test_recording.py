"""Recording model and bundle round-trip behaviour."""

from __future__ import annotations

import json

import numpy as np
import pytest

from eeg_sentinel import (
    Axis,
    ChannelGroup,
    ChannelMeta,
    ChannelSeries,
    ContactQualitySeries,
    Recording,
    generate,
    load_bundle,
    recordings_equal,
    write_bundle,
)
from eeg_sentinel.errors import (
    LengthMismatchError,
    MalformedCsvError,
    MalformedManifestError,
    MissingFileError,
    NonFiniteSampleError,
    RateMismatchError,
)

from conftest import short_config


def tiny_recording(with_quality: bool = False, with_ground_truth: bool = False) -> Recording:
    rng = np.random.default_rng(5)
    eeg = [
        ChannelSeries(ChannelMeta(name, ChannelGroup.EEG), 256.0, rng.normal(size=256))
        for name in ("P7", "O1")
    ]
    motion = [
        ChannelSeries(ChannelMeta("A.X", ChannelGroup.ACCELEROMETER, Axis.X), 64.0, rng.normal(size=64)),
        ChannelSeries(ChannelMeta("M.Z", ChannelGroup.MAGNETOMETER, Axis.Z), 64.0, rng.normal(size=64)),
    ]
    quality = (
        [ContactQualitySeries(n, 2.0, rng.integers(0, 5, size=2)) for n in ("P7", "O1")]
        if with_quality
        else None
    )
    ground_truth = {"P7": "open-contact"} if with_ground_truth else None
    return Recording(eeg=eeg, motion=motion, quality=quality, ground_truth=ground_truth,
                     metadata={"subject": "s01"})


class TestModel:
    def test_eeg_channels_reject_axis(self):
        with pytest.raises(ValueError):
            ChannelMeta("P7", ChannelGroup.EEG, Axis.X)

    def test_motion_channels_require_axis(self):
        with pytest.raises(ValueError):
            ChannelMeta("A.X", ChannelGroup.ACCELEROMETER)

    def test_non_finite_samples_rejected(self):
        with pytest.raises(NonFiniteSampleError):
            ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, [1.0, np.nan, 2.0])

    def test_quality_range_enforced(self):
        with pytest.raises(ValueError):
            ContactQualitySeries("P7", 2.0, [0, 5])

    def test_mixed_eeg_lengths_rejected(self):
        eeg = [
            ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, np.zeros(256) + 1),
            ChannelSeries(ChannelMeta("O1", ChannelGroup.EEG), 256.0, np.zeros(255) + 1),
        ]
        with pytest.raises(LengthMismatchError):
            Recording(eeg=eeg, motion=[])

    def test_non_integer_rate_ratio_rejected(self):
        eeg = [ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 100.0, np.ones(100))]
        motion = [
            ChannelSeries(ChannelMeta("A.X", ChannelGroup.ACCELEROMETER, Axis.X), 64.0, np.ones(64))
        ]
        with pytest.raises(RateMismatchError):
            Recording(eeg=eeg, motion=motion)

    def test_duration_disagreement_rejected(self):
        eeg = [ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, np.ones(512))]
        motion = [
            ChannelSeries(ChannelMeta("A.X", ChannelGroup.ACCELEROMETER, Axis.X), 64.0, np.ones(96))
        ]
        with pytest.raises(LengthMismatchError):
            Recording(eeg=eeg, motion=motion)

    def test_duplicate_names_rejected(self):
        eeg = [
            ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, np.ones(8)),
            ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, np.ones(8)),
        ]
        with pytest.raises(ValueError):
            Recording(eeg=eeg, motion=[])

    def test_motion_prefix_must_match_group(self):
        motion = [
            ChannelSeries(ChannelMeta("M.X", ChannelGroup.ACCELEROMETER, Axis.X), 64.0, np.ones(8))
        ]
        eeg = [ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 64.0, np.ones(8))]
        with pytest.raises(ValueError):
            Recording(eeg=eeg, motion=motion)


class TestBundleRoundTrip:
    @pytest.mark.parametrize("quality,gt", [(False, False), (True, False), (False, True), (True, True)])
    def test_round_trip_identity(self, tmp_path, quality, gt):
        original = tiny_recording(with_quality=quality, with_ground_truth=gt)
        write_bundle(original, tmp_path / "b")
        loaded = load_bundle(tmp_path / "b")
        assert recordings_equal(original, loaded)

    def test_round_trip_is_bit_exact_on_disk(self, tmp_path):
        original = tiny_recording(with_quality=True, with_ground_truth=True)
        write_bundle(original, tmp_path / "one")
        write_bundle(load_bundle(tmp_path / "one"), tmp_path / "two")
        for name in ("manifest.json", "eeg.csv", "motion.csv", "quality.csv", "ground_truth.json"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_one_second_two_channel_recording_round_trips(self, tmp_path):
        rng = np.random.default_rng(9)
        rec = Recording(
            eeg=[ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, rng.normal(size=256))],
            motion=[
                ChannelSeries(
                    ChannelMeta("A.X", ChannelGroup.ACCELEROMETER, Axis.X), 64.0, rng.normal(size=64)
                )
            ],
        )
        write_bundle(rec, tmp_path / "b")
        assert recordings_equal(rec, load_bundle(tmp_path / "b"))

    def test_empty_motion_group_round_trips(self, tmp_path):
        rec = Recording(
            eeg=[ChannelSeries(ChannelMeta("P7", ChannelGroup.EEG), 256.0, np.arange(16.0))],
            motion=[],
        )
        write_bundle(rec, tmp_path / "b")
        loaded = load_bundle(tmp_path / "b")
        assert loaded.motion == [] and recordings_equal(rec, loaded)

    def test_default_synthetic_bundle_shape(self, tmp_path):
        # 60 s of the default montage: 15360 EEG rows at 256 Hz, 3840
        # motion rows at 64 Hz, and 60 s durations on both groups.
        rec = generate(short_config(seed=1, duration_s=60.0))
        root = write_bundle(rec, tmp_path / "b")
        loaded = load_bundle(root)
        assert len(loaded.eeg) == 14 and loaded.eeg[0].samples.size == 15360
        assert len(loaded.motion) == 6 and loaded.motion[0].samples.size == 3840
        assert loaded.eeg[0].duration_s == pytest.approx(60.0)
        assert loaded.motion[0].duration_s == pytest.approx(60.0)
        assert loaded.eeg_channel_names == list(rec.eeg_channel_names)


class TestBundleErrors:
    def test_missing_file_named(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        (tmp_path / "b" / "motion.csv").unlink()
        with pytest.raises(MissingFileError, match="motion.csv"):
            load_bundle(tmp_path / "b")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_bundle(tmp_path / "nope")

    def test_nan_cell_cited_by_row_and_column(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        path = tmp_path / "b" / "eeg.csv"
        lines = path.read_text().splitlines()
        cells = lines[3].split(",")
        cells[1] = "NaN"
        lines[3] = ",".join(cells)
        path.write_text("\r\n".join(lines) + "\r\n")
        with pytest.raises(NonFiniteSampleError, match=r"row 3.*'O1'"):
            load_bundle(tmp_path / "b")

    def test_unparsable_cell_cited(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        path = tmp_path / "b" / "eeg.csv"
        text = path.read_text().replace("\r\n", "\n", 1)
        lines = text.splitlines()
        cells = lines[1].split(",")
        cells[0] = "bogus"
        lines[1] = ",".join(cells)
        path.write_text("\r\n".join(lines) + "\r\n")
        with pytest.raises(MalformedCsvError, match=r"row 1.*'P7'.*bogus"):
            load_bundle(tmp_path / "b")

    def test_ragged_row_rejected(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        path = tmp_path / "b" / "eeg.csv"
        lines = path.read_text().splitlines()
        lines[2] = lines[2] + ",0"
        path.write_text("\r\n".join(lines) + "\r\n")
        with pytest.raises(MalformedCsvError, match="row 2"):
            load_bundle(tmp_path / "b")

    def test_header_must_match_manifest(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        path = tmp_path / "b" / "eeg.csv"
        lines = path.read_text().splitlines()
        lines[0] = "X1,X2"
        path.write_text("\r\n".join(lines) + "\r\n")
        with pytest.raises(MalformedCsvError, match="header"):
            load_bundle(tmp_path / "b")

    def test_tampered_manifest_rate_rejected(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        manifest_path = tmp_path / "b" / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest["eeg_rate_hz"] = 100.0  # no longer an integer multiple of 64
        manifest_path.write_text(json.dumps(manifest))
        with pytest.raises(RateMismatchError):
            load_bundle(tmp_path / "b")

    def test_bad_manifest_json_rejected(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        (tmp_path / "b" / "manifest.json").write_text("{not json")
        with pytest.raises(MalformedManifestError):
            load_bundle(tmp_path / "b")

    def test_unknown_motion_prefix_rejected(self, tmp_path):
        write_bundle(tiny_recording(), tmp_path / "b")
        manifest_path = tmp_path / "b" / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest["motion_channels"][0]["name"] = "G.X"
        manifest_path.write_text(json.dumps(manifest))
        with pytest.raises(MalformedManifestError, match="G.X"):
            load_bundle(tmp_path / "b")

    def test_quality_value_out_of_range_rejected(self, tmp_path):
        write_bundle(tiny_recording(with_quality=True), tmp_path / "b")
        path = tmp_path / "b" / "quality.csv"
        lines = path.read_text().splitlines()
        lines[1] = "7," + lines[1].split(",")[1]
        path.write_text("\r\n".join(lines) + "\r\n")
        with pytest.raises(MalformedCsvError, match=r"\[0, 4\]"):
            load_bundle(tmp_path / "b")
