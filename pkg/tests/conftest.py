"""Shared fixtures: short synthetic recordings with known ground truth."""

from __future__ import annotations

import pytest

from eeg_sentinel import Activity, FailureMode, SynthConfig, generate

BAD_SET = {
    "T8": FailureMode.high_mains(),
    "P7": FailureMode.open_contact(),
    "O1": FailureMode.open_contact(),
}


def short_config(seed: int = 0, **overrides) -> SynthConfig:
    """8 s keeps Welch happy (15 segments) while staying fast."""
    kwargs = dict(duration_s=8.0, seed=seed)
    kwargs.update(overrides)
    return SynthConfig(**kwargs)


@pytest.fixture(scope="session")
def walking_recording():
    return generate(short_config(seed=101))


@pytest.fixture(scope="session")
def faulty_recording():
    return generate(short_config(seed=202, failures=dict(BAD_SET)))


@pytest.fixture(scope="session")
def blinking_recording():
    return generate(short_config(seed=303, activity=Activity.BLINKING))
