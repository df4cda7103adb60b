"""Paired CSV writers and readers round-trip their matrices exactly."""

from __future__ import annotations

import io

import numpy as np
import pytest

from eeg_sentinel import CorrelationMap, analyze_recording, correlation_map, welch_psd
from eeg_sentinel.errors import MalformedCsvError
from eeg_sentinel.matrices import (
    emit_matrices,
    read_correlation_map,
    read_mains_levels,
    read_psd,
    safe_filename,
    write_correlation_map,
    write_mains_levels,
    write_psd,
)


def sample_map(seed: int = 0, n: int = 5) -> CorrelationMap:
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(n, 2))
    return correlation_map(vectors, [f"C{i}" for i in range(n)])


class TestCorrelationMapCsv:
    def test_round_trip_exact(self):
        cmap = sample_map()
        buf = io.StringIO()
        write_correlation_map(buf, cmap)
        names, values = read_correlation_map(io.StringIO(buf.getvalue()))
        assert names == cmap.channel_names
        assert np.array_equal(values, cmap.values)

    def test_crlf_line_endings(self):
        buf = io.StringIO()
        write_correlation_map(buf, sample_map())
        assert "\r\n" in buf.getvalue()

    def test_bad_header_rejected(self):
        with pytest.raises(MalformedCsvError):
            read_correlation_map(io.StringIO("nope,C0\r\nC0,1\r\n"))

    def test_row_name_mismatch_rejected(self):
        with pytest.raises(MalformedCsvError):
            read_correlation_map(io.StringIO("channel,C0\r\nWRONG,1\r\n"))

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(MalformedCsvError):
            read_correlation_map(io.StringIO("channel,C0,C1\r\nC0,1,0\r\n"))


class TestMainsLevelsCsv:
    def test_round_trip_exact(self):
        names = ["P7", "O1"]
        levels = np.array([1.2345678901234567, 0.1])
        normalized = levels / levels.max()
        buf = io.StringIO()
        write_mains_levels(buf, names, levels, normalized)
        got_names, got_levels, got_norm = read_mains_levels(io.StringIO(buf.getvalue()))
        assert got_names == names
        assert np.array_equal(got_levels, levels)
        assert np.array_equal(got_norm, normalized)

    def test_bad_header_rejected(self):
        with pytest.raises(MalformedCsvError):
            read_mains_levels(io.StringIO("channel,level\r\n"))


class TestPsdCsv:
    def test_round_trip_exact(self, walking_recording):
        psd = welch_psd(walking_recording.eeg[0], 1.0)
        buf = io.StringIO()
        write_psd(buf, psd)
        freqs, power = read_psd(io.StringIO(buf.getvalue()))
        assert np.array_equal(freqs, psd.frequencies)
        assert np.array_equal(power, psd.power)

    def test_bad_header_rejected(self):
        with pytest.raises(MalformedCsvError):
            read_psd(io.StringIO("hz,power\r\n"))


class TestEmission:
    def test_safe_filename(self):
        assert safe_filename("A.X") == "A.X"
        assert safe_filename("weird name/x") == "weird_name_x"

    def test_emit_writes_expected_set(self, walking_recording, tmp_path):
        artifacts = analyze_recording(walking_recording)
        written = emit_matrices(tmp_path / "m", artifacts)
        names = sorted(p.name for p in written)
        assert "correlation_map.csv" in names
        assert "mains_levels.csv" in names
        assert sum(n.startswith("psd_") for n in names) == 14
        for p in written:
            assert p.stat().st_size > 0
