"""Command-line interface.

Exit codes: 0 on success (a report full of failed channels is still a
success), 1 on bad input (bundle, flags, environment), 2 on internal
numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import os
import sys
from pathlib import Path

from . import figures, matrices
from .detect import DetectorConfig, analyze_recording
from .errors import (
    ConvergenceError,
    InvalidConfigError,
    NonFiniteInputError,
    SentinelError,
    UnknownChannelError,
)
from .pca import correlation_map, loading_plane_vectors, svd_decompose
from .preprocess import build_feature_matrix
from .recording import load_bundle, write_bundle
from .spectral import welch_psd
from .synth import FailureMode, SynthConfig, Activity, generate

MAINS_ENV_VAR = "EEG_SENTINEL_MAINS_HZ"


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_components(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected I,J, got {text!r}")
    try:
        i, j = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers, got {text!r}") from None
    if i < 0 or j < 0:
        raise argparse.ArgumentTypeError("component indices must be nonnegative")
    return i, j


def _parse_failure(text: str) -> tuple[str, str]:
    name, sep, label = text.partition(":")
    if not sep or not name or not label:
        raise argparse.ArgumentTypeError(f"expected NAME:MODE, got {text!r}")
    return name, label


def _mains_from_env() -> float:
    raw = os.environ.get(MAINS_ENV_VAR)
    if raw is None:
        return 50.0
    try:
        value = float(raw)
    except ValueError:
        raise InvalidConfigError(f"{MAINS_ENV_VAR}={raw!r} is not a number") from None
    if value not in (50.0, 60.0):
        raise InvalidConfigError(f"{MAINS_ENV_VAR} must be 50 or 60, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eeg-sentinel", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    analyze = sub.add_parser(
        "analyze", help="detect failed channels in a recording bundle"
    )
    analyze.add_argument("bundle", type=Path, help="recording bundle directory")
    analyze.add_argument("--json", type=Path, metavar="PATH", help="write the report here instead of stdout")
    analyze.add_argument(
        "--emit-matrices", type=Path, metavar="DIR",
        help="also write correlation_map.csv, mains_levels.csv, psd_<channel>.csv",
    )
    analyze.add_argument(
        "--emit-plots", type=Path, metavar="DIR",
        help="also render correlation map, mains levels, loading plane, and PSD figures",
    )
    analyze.add_argument(
        "--mains-freq", type=float, choices=(50.0, 60.0), default=None,
        help=f"mains frequency in Hz (default 50; {MAINS_ENV_VAR} overrides, the flag wins)",
    )
    analyze.add_argument("--flag-fraction", type=float, default=0.25, help="fraction of channels to flag on mains evidence")
    analyze.add_argument("--pca-threshold", type=float, default=-0.3, help="mean-correlation threshold for PcaAnticorrelated")
    analyze.add_argument("--components", type=_parse_components, default=(0, 1), metavar="I,J", help="loading-plane component pair")
    analyze.add_argument(
        "--deterministic", action=argparse.BooleanOptionalAction, default=True,
        help="omit timestamps so identical inputs give identical bytes (default on)",
    )

    synth = sub.add_parser("synth", help="generate a synthetic recording bundle")
    synth.add_argument("--out", type=Path, required=True, metavar="DIR", help="bundle directory to write")
    synth.add_argument("--seed", type=int, default=0, metavar="UINT")
    synth.add_argument("--activity", choices=[a.value for a in Activity], default=None)
    synth.add_argument(
        "--fail", action="append", type=_parse_failure, default=[], metavar="NAME:MODE",
        help="inject a failure (high-mains, open-contact, spike); repeatable",
    )
    synth.add_argument("--duration", type=float, default=None, metavar="SECONDS")
    synth.add_argument("--config", type=Path, default=None, metavar="PATH", help="SynthConfig JSON; inline flags override it")
    synth.add_argument(
        "--deterministic", action=argparse.BooleanOptionalAction, default=True,
        help="omit timestamps from bundle metadata (default on)",
    )

    spectrum = sub.add_parser("spectrum", help="Welch spectrum of one channel as CSV")
    spectrum.add_argument("bundle", type=Path)
    spectrum.add_argument("--channel", required=True, metavar="NAME")
    spectrum.add_argument("--out", type=Path, default=None, metavar="PATH", help="write CSV here instead of stdout")
    spectrum.add_argument("--plot", type=Path, default=None, metavar="PATH", help="also render the spectrum as a figure")

    pca_map = sub.add_parser("pca-map", help="loading-plane correlation map as CSV")
    pca_map.add_argument("bundle", type=Path)
    pca_map.add_argument("--components", type=_parse_components, default=(0, 1), metavar="I,J")
    pca_map.add_argument("--out", type=Path, default=None, metavar="PATH", help="write CSV here instead of stdout")
    pca_map.add_argument("--plot", type=Path, default=None, metavar="PATH", help="also render the map as a figure")

    return parser


def _run_analyze(args: argparse.Namespace) -> int:
    recording = load_bundle(args.bundle)
    mains_hz = args.mains_freq if args.mains_freq is not None else _mains_from_env()
    config = DetectorConfig(
        flag_fraction=args.flag_fraction,
        mains_hz=mains_hz,
        pca_anticorr_threshold=args.pca_threshold,
        components=args.components,
    )
    artifacts = analyze_recording(recording, config)
    report = artifacts.report
    if not args.deterministic:
        report.recording_metadata = {
            **report.recording_metadata,
            "analyzed_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
    text = report.to_json()
    if args.json:
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.emit_matrices:
        matrices.emit_matrices(args.emit_matrices, artifacts)
    if args.emit_plots:
        figures.render_report_figures(args.emit_plots, artifacts)
    return 0


def _run_synth(args: argparse.Namespace) -> int:
    if args.config is not None:
        if not args.config.is_file():
            raise InvalidConfigError(f"config file {args.config} not found")
        config = SynthConfig.from_json(args.config.read_text(encoding="utf-8"))
    else:
        config = SynthConfig()
    overrides: dict = {"seed": args.seed}
    if args.activity is not None:
        overrides["activity"] = Activity(args.activity)
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    if args.fail:
        failures = dict(config.failures)
        for name, label in args.fail:
            failures[name] = FailureMode.parse(label)
        overrides["failures"] = failures
    config = dataclasses.replace(config, **overrides)
    recording = generate(config)
    if not args.deterministic:
        recording.metadata["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    write_bundle(recording, args.out)
    sys.stdout.write(json.dumps(recording.ground_truth or {}, indent=2, sort_keys=True) + "\n")
    return 0


def _run_spectrum(args: argparse.Namespace) -> int:
    recording = load_bundle(args.bundle)
    series = None
    for candidate in list(recording.eeg) + list(recording.motion):
        if candidate.meta.name == args.channel:
            series = candidate
            break
    if series is None:
        known = recording.eeg_channel_names + recording.motion_channel_names
        raise UnknownChannelError(f"channel {args.channel!r} not in bundle (channels: {known})")
    psd = welch_psd(series)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with args.out.open("w", newline="", encoding="utf-8") as fh:
            matrices.write_psd(fh, psd)
    else:
        matrices.write_psd(sys.stdout, psd)
    if args.plot:
        figures.save_psd_figure([psd], None, args.plot)
    return 0


def _run_pca_map(args: argparse.Namespace) -> int:
    recording = load_bundle(args.bundle)
    features = build_feature_matrix(recording)
    decomposition = svd_decompose(features)
    vectors = loading_plane_vectors(decomposition, args.components)
    cmap = correlation_map(vectors, features.channel_names)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with args.out.open("w", newline="", encoding="utf-8") as fh:
            matrices.write_correlation_map(fh, cmap)
    else:
        matrices.write_correlation_map(sys.stdout, cmap)
    if args.plot:
        figures.save_correlation_map_figure(cmap, args.plot)
    return 0


_COMMANDS = {
    "analyze": _run_analyze,
    "synth": _run_synth,
    "spectrum": _run_spectrum,
    "pca-map": _run_pca_map,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConvergenceError, NonFiniteInputError) as exc:
        print(f"eeg-sentinel: numerical failure: {exc}", file=sys.stderr)
        return 2
    except SentinelError as exc:
        print(f"eeg-sentinel: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"eeg-sentinel: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())
