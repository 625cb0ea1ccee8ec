"""Command-line entry point: transform, synth, build, evaluate, report.

Configuration precedence is defaults < --config file < VIBSPECT_* env vars
< explicit flags; the effective config is echoed into every output
directory. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from vibspect.annotation import CLASS_NAMES, FaultClass
from vibspect.config import PipelineConfig, load_config, save_config
from vibspect.cwt import cwt_fft, make_scale_grid, write_scalogram
from vibspect.dataset import build_dataset
from vibspect.errors import DataError
from vibspect.metrics import EvalReport, evaluate
from vibspect.render import make_spectrogram_image, render_png
from vibspect.report import DATASETS, MODELS, compare
from vibspect.segmentation import segment_signal
from vibspect.signal_io import (
    FaultSpec,
    Signal,
    generate_fault_signal,
    load_signal,
    write_signal_raw,
)

ENV_PREFIX = "VIBSPECT_"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

# Per-class generation defaults: distinct impulse rates (BPFO/BPFI/BSF
# style) and resonance bands so classes are separable in the images.
DEFAULT_FAULT_SPECS = {
    "Normal": dict(impulse_amplitude=0.0, shaft_amplitude=0.4, noise_std=0.05),
    "Ball": dict(fault_hz=118.9, resonance_hz=2800.0, decay_rate=800.0),
    "InnerRace": dict(fault_hz=162.2, resonance_hz=1400.0, decay_rate=900.0),
    "OuterRace": dict(fault_hz=107.4, resonance_hz=700.0, decay_rate=700.0),
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _env_overrides() -> dict:
    overrides = {}
    field_types = {
        "window_len": int,
        "overlap": float,
        "num_scales": int,
        "f_min_hz": float,
        "f_max_hz": float,
        "image_size": int,
        "colormap": str,
        "train_ratio": float,
        "val_ratio": float,
        "test_ratio": float,
        "augmentation_multiplier": int,
        "max_rotation_deg": float,
        "energy_quantile": float,
        "log_epsilon": float,
        "seed": int,
        "jobs": int,
    }
    for field, cast in field_types.items():
        raw = os.environ.get(ENV_PREFIX + field.upper())
        if raw is not None:
            try:
                overrides[field] = cast(raw)
            except ValueError:
                raise _UsageError(
                    f"environment override {ENV_PREFIX}{field.upper()}={raw!r} "
                    f"is not a valid {cast.__name__}"
                ) from None
    return overrides


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise _UsageError(f"--ratios expects three comma-separated values, got {text!r}")
    try:
        train, val, test = (float(p) for p in parts)
    except ValueError:
        raise _UsageError(f"--ratios has a non-numeric value: {text!r}") from None
    return train, val, test


def _add_config_flags(parser: argparse.ArgumentParser, include=()) -> None:
    flags = {
        "window_len": ("--window-len", int, "segment window length in samples (default 2048)"),
        "overlap": ("--overlap", float, "segment overlap fraction in [0,1) (default 0.5)"),
        "num_scales": ("--num-scales", int, "number of wavelet scales (default 64)"),
        "f_min_hz": ("--f-min", float, "lowest pseudo-frequency in Hz (default rate/500)"),
        "f_max_hz": ("--f-max", float, "highest pseudo-frequency in Hz (default rate/4)"),
        "image_size": ("--image-size", int, "output image height=width (default 640)"),
        "colormap": ("--colormap", str, "grayscale or viridis (default grayscale)"),
        "augmentation_multiplier": (
            "--augmentation-multiplier",
            int,
            "train copies per original, 1 disables augmentation (default 2)",
        ),
        "energy_quantile": (
            "--energy-quantile",
            float,
            "annotation energy quantile in (0,1) (default 0.9)",
        ),
        "seed": ("--seed", int, "deterministic RNG seed (default 0)"),
        "jobs": ("--jobs", int, "worker parallelism; output independent of it (default 1)"),
    }
    for name in include:
        if name == "ratios":
            parser.add_argument(
                "--ratios",
                type=str,
                default=None,
                help="train,val,test split ratios summing to 1 (default 0.8,0.1,0.1)",
            )
            continue
        flag, cast, help_text = flags[name]
        parser.add_argument(flag, dest=name, type=cast, default=None, help=help_text)
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="JSON config file; flags take precedence over it",
    )


def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if getattr(args, "config", None):
        config = load_config(args.config)
    env = _env_overrides()
    if env:
        config = config.with_overrides(**env)
    flag_fields = (
        "window_len",
        "overlap",
        "num_scales",
        "f_min_hz",
        "f_max_hz",
        "image_size",
        "colormap",
        "augmentation_multiplier",
        "energy_quantile",
        "seed",
        "jobs",
    )
    overrides = {
        name: getattr(args, name)
        for name in flag_fields
        if getattr(args, name, None) is not None
    }
    if getattr(args, "ratios", None) is not None:
        train, val, test = _parse_ratios(args.ratios)
        overrides.update(train_ratio=train, val_ratio=val, test_ratio=test)
    config = config.with_overrides(**overrides)
    try:
        config.validate()
    except DataError as exc:
        raise _UsageError(str(exc)) from None
    return config


def _cmd_transform(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(config, out_dir / "config.json")

    def transform_one(input_path: str) -> int:
        signal = load_signal(input_path, args.format, args.sample_rate)
        rate = signal.sample_rate_hz
        stem = Path(input_path).stem
        try:
            f_min = config.f_min_hz if config.f_min_hz is not None else rate / 500.0
            f_max = config.f_max_hz if config.f_max_hz is not None else rate / 4.0
            grid = make_scale_grid(f_min, f_max, config.num_scales, rate)
            segments = segment_signal(signal, config.window_len, config.overlap)
            for seg_idx, segment in enumerate(segments):
                name = f"{stem}_seg{seg_idx:03d}"
                scalogram = cwt_fft(segment, grid)
                image = make_spectrogram_image(
                    scalogram,
                    out_h=config.image_size,
                    out_w=config.image_size,
                    colormap=config.colormap,
                    provenance=name,
                    epsilon=config.log_epsilon,
                )
                render_png(image, out_dir / f"{name}.png")
                if args.dump_scalograms:
                    write_scalogram(scalogram, out_dir / f"{name}.scalogram")
            return len(segments)
        except (DataError, ValueError) as exc:
            raise DataError(f"{input_path}: {exc}") from exc

    # Files write to distinct paths, so per-file parallelism cannot change
    # any output byte.
    if config.jobs > 1 and len(args.inputs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            written = sum(pool.map(transform_one, args.inputs))
    else:
        written = sum(transform_one(path) for path in args.inputs)
    print(f"wrote {written} spectrogram image(s) to {out_dir}")
    return EXIT_OK


def _load_fault_specs(path: str | None) -> dict[str, dict]:
    specs = {name: dict(params) for name, params in DEFAULT_FAULT_SPECS.items()}
    if path is None:
        return specs
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read fault spec file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed fault spec file {path}: {exc}") from exc
    for class_name, params in data.items():
        if class_name not in specs:
            raise DataError(
                f"{path}: unknown class {class_name!r}; expected one of {CLASS_NAMES}"
            )
        if not isinstance(params, dict):
            raise DataError(f"{path}: parameters for {class_name} must be an object")
        specs[class_name].update(params)
    return specs


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.count <= 0:
        raise _UsageError(f"--count must be positive, got {args.count}")
    config = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(config, out_dir / "config.json")
    spec_params = _load_fault_specs(args.spec_file)
    records = []
    for i in range(args.count):
        fault_class = FaultClass(i % len(CLASS_NAMES))
        params = spec_params[fault_class.label]
        try:
            spec = FaultSpec(fault_class=fault_class, **params)
            signal = generate_fault_signal(
                spec, args.duration_s, args.sample_rate, seed=config.seed + i
            )
        except (TypeError, ValueError) as exc:
            raise DataError(f"signal {i} ({fault_class.label}): {exc}") from exc
        file_name = f"signal{i:03d}_{fault_class.label}.f32"
        write_signal_raw(signal, out_dir / file_name)
        records.append(
            {
                "file": file_name,
                "fault_class": fault_class.label,
                "sample_rate_hz": args.sample_rate,
                "duration_s": args.duration_s,
                "seed": config.seed + i,
            }
        )
    truth = {"signals": records, "seed": config.seed}
    (out_dir / "signals_manifest.json").write_text(
        json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(records)} signal(s) to {out_dir}")
    return EXIT_OK


def load_signals_dir(signals_dir: str | Path) -> list[Signal]:
    """Load a synth-layout directory (raw f32 files + signals_manifest.json)."""
    signals_dir = Path(signals_dir)
    manifest_path = signals_dir / "signals_manifest.json"
    try:
        truth = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read signals manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed signals manifest {manifest_path}: {exc}") from exc
    signals = []
    for record in truth.get("signals", []):
        loaded = load_signal(
            signals_dir / record["file"], "raw_f32le", record["sample_rate_hz"]
        )
        signals.append(
            Signal(
                samples=loaded.samples,
                sample_rate_hz=loaded.sample_rate_hz,
                source_label=FaultClass.from_label(record["fault_class"]),
            )
        )
    if not signals:
        raise DataError(f"no signals listed in {manifest_path}")
    return signals


def _cmd_build(args: argparse.Namespace) -> int:
    config = _effective_config(args)
    signals = load_signals_dir(args.signals)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(config, out_dir / "config.json")
    manifest = build_dataset(signals, config, out_dir)
    print(
        f"built dataset in {out_dir}: "
        + ", ".join(f"{s}={manifest.counts[s]}" for s in ("train", "val", "test"))
    )
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate(
        args.dataset,
        args.predictions,
        split=args.split,
        iou_threshold=args.iou_threshold,
        confidence_threshold=args.confidence_threshold,
    )
    out_path = (
        Path(args.out)
        if args.out
        else Path(args.predictions) / f"eval_report_{args.split}.json"
    )
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(report.format_table())
    print(f"report written to {out_path}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        data = json.loads(Path(args.report).read_text(encoding="utf-8"))
        report = EvalReport.from_dict(data)
    except OSError as exc:
        raise DataError(f"cannot read report {args.report}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed report {args.report}: {exc}") from exc
    try:
        summary = compare(report, args.dataset, args.model)
    except KeyError as exc:
        raise DataError(str(exc.args[0])) from None
    print(summary.format_table())
    if args.out:
        Path(args.out).write_text(
            json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vibspect",
        description="vibration signals -> spectrogram detection datasets -> metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "transform",
        help="convert signal files to spectrogram PNGs",
        description="Segment signals, transform each window, write PNGs.",
    )
    p.add_argument("inputs", nargs="+", help="signal files to transform")
    p.add_argument(
        "--format",
        required=True,
        choices=("csv", "wav", "raw_f32le"),
        help="input file format",
    )
    p.add_argument(
        "--sample-rate",
        type=float,
        default=12000.0,
        help="sample rate in Hz (wav headers override; default 12000)",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--dump-scalograms",
        action="store_true",
        help="also write raw coefficient matrices per segment",
    )
    _add_config_flags(
        p,
        include=(
            "window_len",
            "overlap",
            "num_scales",
            "f_min_hz",
            "f_max_hz",
            "image_size",
            "colormap",
            "jobs",
        ),
    )
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser(
        "synth",
        help="generate a synthetic labeled signal corpus",
        description="Write deterministic synthetic fault signals plus a truth manifest.",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, required=True, help="number of signals (cycles the 4 classes)")
    p.add_argument(
        "--duration-s", type=float, default=0.4, help="signal duration in seconds (default 0.4)"
    )
    p.add_argument(
        "--sample-rate", type=float, default=12000.0, help="sample rate in Hz (default 12000)"
    )
    p.add_argument(
        "--spec-file",
        default=None,
        help="JSON overriding per-class generation parameters",
    )
    _add_config_flags(p, include=("seed",))
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser(
        "build",
        help="build an images/labels/manifest dataset from a signal corpus",
        description="Run segment -> transform -> render -> annotate, split, augment.",
    )
    p.add_argument("--signals", required=True, help="directory produced by synth")
    p.add_argument("--out", required=True, help="dataset output directory")
    _add_config_flags(
        p,
        include=(
            "window_len",
            "overlap",
            "num_scales",
            "f_min_hz",
            "f_max_hz",
            "image_size",
            "colormap",
            "ratios",
            "augmentation_multiplier",
            "energy_quantile",
            "seed",
            "jobs",
        ),
    )
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser(
        "evaluate",
        help="score prediction files against a dataset split",
        description="Compute per-class AP, mAP@0.5, precision, recall, F1.",
    )
    p.add_argument("--dataset", required=True, help="dataset directory (with manifest.json)")
    p.add_argument("--predictions", required=True, help="directory of per-image prediction files")
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--iou-threshold", type=float, default=0.5, help="IoU match threshold (default 0.5)")
    p.add_argument(
        "--confidence-threshold",
        type=float,
        default=0.25,
        help="confidence cutoff for PRE/REC/F1 (default 0.25; AP ignores it)",
    )
    p.add_argument("--out", default=None, help="report JSON path (default into predictions dir)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "report",
        help="compare an evaluation report against published reference scores",
        description="Per-metric deltas against the built-in benchmark table.",
    )
    p.add_argument("--report", required=True, help="evaluation report JSON")
    p.add_argument("--dataset", required=True, help=f"one of {DATASETS}")
    p.add_argument("--model", required=True, help=f"one of {MODELS}")
    p.add_argument("--out", default=None, help="optional comparison JSON path")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
