"""Seeded synthetic recording generator with injectable channel failures.

Every EEG channel is background + rhythm + mains:

* background: four octave-spaced banks of five sinusoids each (centers
  2, 4, 8, 16 Hz, frequencies and phases drawn once per recording and
  shared across channels, per-channel band gains in [0.6, 1.4]) plus
  per-channel white noise; shared-to-white variance split 0.65 / 0.35 of
  the configured background std. Sharing the bank waveforms is what
  makes clean channels correlate the way electrodes on one head do.
* rhythm: a 10 Hz sine with per-channel random phase.
* mains: a sine at the mains frequency with one common phase across
  channels and per-channel amplitude jitter of +/-20 percent.

Motion channels carry a common stride oscillation (fundamental plus
half-amplitude second harmonic, per-channel gain and small phase
jitter) plus noise. Walking means moderate accelerometer and strong
magnetometer amplitudes, head shaking swaps the two, and blinking is
near-zero noise only.

Failure modes modify a single channel: high-mains multiplies its mains
term (default 20x), open-contact scales signal and mains to 5 percent,
and spike adds a Poisson train (default 1/s) of 200 uV decaying pulses.

Randomness comes from Philox counter streams keyed by SHA-256 of
(seed, stream label), so output is bit-identical across platforms and
per-channel draws never interfere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InvalidConfigError, UnknownChannelError
from .recording import Axis, ChannelGroup, ChannelMeta, ChannelSeries, Recording

DEFAULT_EEG_CHANNELS = (
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
)

_MOTION_META = tuple(
    ChannelMeta(f"{prefix}.{axis.value}", group, axis)
    for prefix, group in (("A", ChannelGroup.ACCELEROMETER), ("M", ChannelGroup.MAGNETOMETER))
    for axis in (Axis.X, Axis.Y, Axis.Z)
)

# Background recipe constants (see module docstring).
_BANK_CENTERS_HZ = (2.0, 4.0, 8.0, 16.0)
_SINES_PER_BANK = 5
_SHARED_VARIANCE_FRACTION = 0.65
_BAND_GAIN_RANGE = (0.6, 1.4)
_MAINS_JITTER_RANGE = (0.8, 1.2)
_RHYTHM_HZ = 10.0

# Motion recipe constants.
_MOTION_GAIN_RANGE = (0.7, 1.3)
_MOTION_PHASE_JITTER = 0.5          # radians
_MOTION_NOISE_FRACTION = 0.1        # of the group amplitude
_BLINK_NOISE_STD = 0.01
_ACTIVITY_AMPS = {
    # activity -> (accelerometer amp, magnetometer amp, stride band in Hz)
    "walking": (1.0, 2.5, (1.2, 2.2)),
    "head-shaking": (2.5, 1.0, (2.0, 3.5)),
}


class Activity(str, Enum):
    WALKING = "walking"
    HEAD_SHAKING = "head-shaking"
    BLINKING = "blinking"


class FailureKind(str, Enum):
    HIGH_MAINS = "high-mains"
    OPEN_CONTACT = "open-contact"
    SPIKE_ARTEFACT = "spike"


@dataclass(frozen=True)
class FailureMode:
    """One channel's failure and its parameters (only those for its kind apply)."""

    kind: FailureKind
    mains_multiplier: float = 20.0
    attenuation: float = 0.05
    spike_rate_hz: float = 1.0
    spike_amp_uv: float = 200.0

    def __post_init__(self) -> None:
        for name in ("mains_multiplier", "attenuation", "spike_rate_hz", "spike_amp_uv"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"FailureMode.{name} must be positive")

    @classmethod
    def high_mains(cls, multiplier: float = 20.0) -> "FailureMode":
        return cls(FailureKind.HIGH_MAINS, mains_multiplier=multiplier)

    @classmethod
    def open_contact(cls, attenuation: float = 0.05) -> "FailureMode":
        return cls(FailureKind.OPEN_CONTACT, attenuation=attenuation)

    @classmethod
    def spike_artefact(cls, rate_hz: float = 1.0, amp_uv: float = 200.0) -> "FailureMode":
        return cls(FailureKind.SPIKE_ARTEFACT, spike_rate_hz=rate_hz, spike_amp_uv=amp_uv)

    def label(self) -> str:
        return self.kind.value

    @classmethod
    def parse(cls, label: str) -> "FailureMode":
        try:
            return cls(FailureKind(label))
        except ValueError:
            known = ", ".join(k.value for k in FailureKind)
            raise InvalidConfigError(f"unknown failure mode {label!r} (known: {known})") from None


@dataclass(frozen=True)
class SynthConfig:
    duration_s: float = 60.0
    eeg_rate_hz: float = 256.0
    motion_rate_hz: float = 64.0
    eeg_channel_names: tuple[str, ...] = DEFAULT_EEG_CHANNELS
    eeg_background_std_uv: float = 10.0
    rhythm_amp_uv: float = 5.0
    base_mains_amp_uv: float = 2.0
    mains_hz: float = 50.0
    activity: Activity = Activity.WALKING
    failures: dict[str, FailureMode] = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> None:
        if self.duration_s <= 0 or self.eeg_rate_hz <= 0 or self.motion_rate_hz <= 0:
            raise InvalidConfigError("duration and rates must be positive")
        ratio = self.eeg_rate_hz / self.motion_rate_hz
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise InvalidConfigError(
                f"eeg_rate_hz {self.eeg_rate_hz} must be an integer multiple of "
                f"motion_rate_hz {self.motion_rate_hz}"
            )
        if len(self.eeg_channel_names) < 1:
            raise InvalidConfigError("need at least one EEG channel name")
        if len(set(self.eeg_channel_names)) != len(self.eeg_channel_names):
            raise InvalidConfigError("EEG channel names must be unique")
        for amp_name in ("eeg_background_std_uv", "rhythm_amp_uv", "base_mains_amp_uv"):
            if getattr(self, amp_name) < 0:
                raise InvalidConfigError(f"{amp_name} must be nonnegative")
        if self.mains_hz <= 0 or self.mains_hz >= self.eeg_rate_hz / 2:
            raise InvalidConfigError("mains_hz must lie between 0 and the EEG Nyquist rate")
        if self.seed < 0:
            raise InvalidConfigError("seed must be a nonnegative integer")
        unknown = [name for name in self.failures if name not in self.eeg_channel_names]
        if unknown:
            raise InvalidConfigError(f"failure channels not in the EEG montage: {unknown}")
        # The detector runs 1 Hz Welch spectra; require room for 3 segments.
        n = int(round(self.duration_s * self.eeg_rate_hz))
        seg = int(round(self.eeg_rate_hz))
        hop = max(1, int(round(seg * 0.5)))
        if n < seg or (n - seg) // hop + 1 < 3:
            raise InvalidConfigError(
                f"duration {self.duration_s} s leaves fewer than 3 Welch segments at 1 Hz resolution"
            )

    def to_json(self) -> str:
        payload = {
            "duration_s": self.duration_s,
            "eeg_rate_hz": self.eeg_rate_hz,
            "motion_rate_hz": self.motion_rate_hz,
            "eeg_channel_names": list(self.eeg_channel_names),
            "eeg_background_std_uv": self.eeg_background_std_uv,
            "rhythm_amp_uv": self.rhythm_amp_uv,
            "base_mains_amp_uv": self.base_mains_amp_uv,
            "mains_hz": self.mains_hz,
            "activity": self.activity.value,
            "failures": {name: mode.label() for name, mode in sorted(self.failures.items())},
            "seed": self.seed,
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SynthConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise InvalidConfigError("config JSON must be an object")
        kwargs: dict = {}
        plain = (
            "duration_s", "eeg_rate_hz", "motion_rate_hz", "eeg_background_std_uv",
            "rhythm_amp_uv", "base_mains_amp_uv", "mains_hz", "seed",
        )
        for key in plain:
            if key in payload:
                kwargs[key] = payload[key]
        if "eeg_channel_names" in payload:
            kwargs["eeg_channel_names"] = tuple(payload["eeg_channel_names"])
        if "activity" in payload:
            try:
                kwargs["activity"] = Activity(payload["activity"])
            except ValueError:
                raise InvalidConfigError(f"unknown activity {payload['activity']!r}") from None
        if "failures" in payload:
            failures = payload["failures"]
            if not isinstance(failures, dict):
                raise InvalidConfigError("config failures must map channel names to mode labels")
            kwargs["failures"] = {name: FailureMode.parse(label) for name, label in failures.items()}
        try:
            config = cls(**kwargs)
        except TypeError as exc:
            raise InvalidConfigError(f"bad config JSON: {exc}") from None
        config.validate()
        return config


def _substream(seed: int, label: str) -> np.random.Generator:
    """Independent, platform-stable stream for one purpose."""
    digest = hashlib.sha256(f"eeg-sentinel/{seed}/{label}".encode()).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "little")))


def _spike_train(n: int, rate_hz: float, mode: FailureMode, rng: np.random.Generator) -> np.ndarray:
    """Poisson train of one-sided decaying pulses, ~40 ms each."""
    duration = n / rate_hz
    out = np.zeros(n)
    count = int(rng.poisson(mode.spike_rate_hz * duration))
    starts = np.sort(rng.uniform(0.0, duration, size=count))
    signs = rng.integers(0, 2, size=count) * 2 - 1
    width = max(2, int(round(0.04 * rate_hz)))
    tau = max(1.0, 0.01 * rate_hz)
    pulse = np.exp(-np.arange(width) / tau)
    for start_s, sign in zip(starts, signs):
        i = int(start_s * rate_hz)
        chunk = min(width, n - i)
        if chunk > 0:
            out[i : i + chunk] += sign * mode.spike_amp_uv * pulse[:chunk]
    return out


def generate(config: SynthConfig) -> Recording:
    """Build a Recording from the recipe; same config, same bytes, always."""
    config.validate()
    seed = config.seed
    n_eeg = int(round(config.duration_s * config.eeg_rate_hz))
    n_motion = int(round(config.duration_s * config.motion_rate_hz))
    t_eeg = np.arange(n_eeg) / config.eeg_rate_hz
    t_motion = np.arange(n_motion) / config.motion_rate_hz

    # Shared draws: one mains phase, one set of background banks.
    mains_phase = float(_substream(seed, "shared/mains").uniform(0.0, 2.0 * np.pi))
    bank_rng = _substream(seed, "shared/eeg-banks")
    bank_waves = []
    sine_amp = config.eeg_background_std_uv * math.sqrt(
        2.0 * _SHARED_VARIANCE_FRACTION / (len(_BANK_CENTERS_HZ) * _SINES_PER_BANK)
    )
    for center in _BANK_CENTERS_HZ:
        freqs = bank_rng.uniform(center / math.sqrt(2.0), center * math.sqrt(2.0), _SINES_PER_BANK)
        phases = bank_rng.uniform(0.0, 2.0 * np.pi, _SINES_PER_BANK)
        wave = np.zeros(n_eeg)
        for f, p in zip(freqs, phases):
            wave += sine_amp * np.sin(2.0 * np.pi * f * t_eeg + p)
        bank_waves.append(wave)
    white_std = config.eeg_background_std_uv * math.sqrt(1.0 - _SHARED_VARIANCE_FRACTION)
    mains_wave = np.sin(2.0 * np.pi * config.mains_hz * t_eeg + mains_phase)

    eeg: list[ChannelSeries] = []
    for name in config.eeg_channel_names:
        rng = _substream(seed, f"eeg/{name}")
        # Fixed draw order keeps channels independent of each other's failures.
        gains = rng.uniform(*_BAND_GAIN_RANGE, size=len(_BANK_CENTERS_HZ))
        rhythm_phase = float(rng.uniform(0.0, 2.0 * np.pi))
        mains_amp = config.base_mains_amp_uv * float(rng.uniform(*_MAINS_JITTER_RANGE))
        noise = rng.normal(0.0, white_std, size=n_eeg) if white_std > 0 else np.zeros(n_eeg)

        signal = noise
        for gain, wave in zip(gains, bank_waves):
            signal = signal + gain * wave
        signal = signal + config.rhythm_amp_uv * np.sin(2.0 * np.pi * _RHYTHM_HZ * t_eeg + rhythm_phase)
        mains = mains_amp * mains_wave

        mode = config.failures.get(name)
        if mode is None:
            samples = signal + mains
        elif mode.kind is FailureKind.HIGH_MAINS:
            samples = signal + mode.mains_multiplier * mains
        elif mode.kind is FailureKind.OPEN_CONTACT:
            samples = mode.attenuation * (signal + mains)
        else:
            spikes = _spike_train(n_eeg, config.eeg_rate_hz, mode, _substream(seed, f"failure/{name}"))
            samples = signal + mains + spikes
        eeg.append(ChannelSeries(ChannelMeta(name, ChannelGroup.EEG), config.eeg_rate_hz, samples))

    motion: list[ChannelSeries] = []
    if config.activity is Activity.BLINKING:
        for meta in _MOTION_META:
            rng = _substream(seed, f"motion/{meta.name}")
            samples = rng.normal(0.0, _BLINK_NOISE_STD, size=n_motion)
            motion.append(ChannelSeries(meta, config.motion_rate_hz, samples))
    else:
        accel_amp, mag_amp, band = _ACTIVITY_AMPS[config.activity.value]
        stride_rng = _substream(seed, "shared/motion")
        f0 = float(stride_rng.uniform(*band))
        p0 = float(stride_rng.uniform(0.0, 2.0 * np.pi))
        p1 = float(stride_rng.uniform(0.0, 2.0 * np.pi))
        for meta in _MOTION_META:
            rng = _substream(seed, f"motion/{meta.name}")
            gain = float(rng.uniform(*_MOTION_GAIN_RANGE))
            jitter = float(rng.uniform(-_MOTION_PHASE_JITTER, _MOTION_PHASE_JITTER))
            amp = accel_amp if meta.group is ChannelGroup.ACCELEROMETER else mag_amp
            wave = np.sin(2.0 * np.pi * f0 * t_motion + p0 + jitter)
            wave = wave + 0.5 * np.sin(2.0 * np.pi * 2.0 * f0 * t_motion + p1 + 2.0 * jitter)
            samples = amp * gain * wave + rng.normal(0.0, _MOTION_NOISE_FRACTION * amp, size=n_motion)
            motion.append(ChannelSeries(meta, config.motion_rate_hz, samples))

    metadata = {
        "generator": "eeg-sentinel.synth",
        "seed": str(seed),
        "activity": config.activity.value,
        "recipe": (
            "banks=2,4,8,16Hz x5 shared; shared_var=0.65; band_gain=0.6..1.4; "
            f"rhythm=10Hz@{config.rhythm_amp_uv}uV per-channel phase; "
            f"mains={config.mains_hz}Hz@{config.base_mains_amp_uv}uV common phase +/-20%"
        ),
    }
    ground_truth = {name: mode.label() for name, mode in sorted(config.failures.items())}
    return Recording(
        eeg=eeg,
        motion=motion,
        quality=None,
        ground_truth=ground_truth if config.failures else {},
        metadata=metadata,
    )


def inject_failure(
    recording: Recording,
    channel: str,
    mode: FailureMode,
    seed: int = 0,
    mains_hz: float = 50.0,
) -> Recording:
    """Return a copy of the recording with one EEG channel's failure applied.

    Only the named channel's samples change. open-contact scales the
    channel in place; high-mains superimposes a fresh interference tone
    (amplitude multiplier x 2 uV, phase drawn from the seed) since the
    original mains component of an arbitrary recording is unknown; spike
    adds a pulse train drawn from the seed.
    """
    names = recording.eeg_channel_names
    if channel not in names:
        raise UnknownChannelError(f"channel {channel!r} not in the EEG montage {names}")

    new_eeg = []
    for series in recording.eeg:
        if series.meta.name != channel:
            new_eeg.append(series)
            continue
        samples = series.samples
        if mode.kind is FailureKind.OPEN_CONTACT:
            samples = samples * mode.attenuation
        elif mode.kind is FailureKind.HIGH_MAINS:
            rng = _substream(seed, f"inject/{channel}")
            t = np.arange(samples.size) / series.sample_rate_hz
            amp = mode.mains_multiplier * 2.0
            samples = samples + amp * np.sin(2.0 * np.pi * mains_hz * t + rng.uniform(0.0, 2.0 * np.pi))
        else:
            samples = samples + _spike_train(
                samples.size, series.sample_rate_hz, mode, _substream(seed, f"inject/{channel}")
            )
        new_eeg.append(ChannelSeries(series.meta, series.sample_rate_hz, samples))

    ground_truth = dict(recording.ground_truth or {})
    ground_truth[channel] = mode.label()
    return Recording(
        eeg=new_eeg,
        motion=list(recording.motion),
        quality=recording.quality,
        ground_truth=ground_truth,
        metadata=dict(recording.metadata),
    )
