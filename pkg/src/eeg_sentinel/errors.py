"""Exception types raised across the package.

Everything derives from SentinelError so callers can catch the whole
family; the CLI maps ConvergenceError and NonFiniteInputError to exit
code 2 (numerical failure) and the rest to exit code 1 (bad input).
"""

from __future__ import annotations


class SentinelError(Exception):
    """Base class for all errors raised by eeg_sentinel."""


# Bundle reading / writing


class MissingFileError(SentinelError):
    """A required bundle file does not exist."""


class MalformedManifestError(SentinelError):
    """manifest.json is unparsable or violates the bundle schema."""


class MalformedCsvError(SentinelError):
    """A bundle CSV has a bad header, ragged row, or unparsable cell."""


class NonFiniteSampleError(SentinelError):
    """A sample value is NaN or infinite (row and column are cited)."""


class RateMismatchError(SentinelError):
    """Sample rates are inconsistent (EEG rate not an integer multiple of motion rate, or mixed rates within a group)."""


class LengthMismatchError(SentinelError):
    """Channel lengths disagree within a group, or group durations disagree."""


class BundleWriteError(SentinelError):
    """Writing a bundle to disk failed."""


# Preprocessing


class FactorTooLargeError(SentinelError):
    """Decimation factor exceeds the series length."""


class TooShortError(SentinelError):
    """Input has too few samples for the requested operation."""


# PCA


class NonFiniteInputError(SentinelError):
    """A matrix handed to the decomposition contains NaN or infinity."""


class ConvergenceError(SentinelError):
    """The iterative SVD fallback exceeded its sweep cap."""


class ComponentIndexError(SentinelError):
    """A requested principal-component index is out of range."""


# Spectral


class SeriesTooShortError(SentinelError):
    """The implied Welch segment would be shorter than 8 samples."""


class BadResolutionError(SentinelError):
    """One Welch segment at the requested resolution would exceed the series length."""


class BinNotRepresentableError(SentinelError):
    """The requested frequency does not fall on the PSD bin grid (or exceeds Nyquist)."""


class AllZeroError(SentinelError):
    """Every level is zero, so normalization is undefined."""


# Detection


class TooFewChannelsError(SentinelError):
    """Fewer channels than the flag rule needs."""


class UnknownChannelError(SentinelError):
    """A named channel does not exist in the given recording or map."""


class InvalidConfigError(SentinelError):
    """A configuration value is out of its documented range."""
