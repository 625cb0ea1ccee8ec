"""Adapter command line: `adapter train` and `adapter infer`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vibspect_adapter.config import AdapterConfig, AdapterError, load_adapter_config
from vibspect_adapter.predictions import write_prediction_file
from vibspect_adapter.runtime import load_predictor, train


def _cmd_train(args) -> int:
    if args.config:
        config = load_adapter_config(args.config)
    elif args.dataset:
        config = AdapterConfig(dataset_dir=args.dataset)
    else:
        raise AdapterError("train needs --config or --dataset")
    config = config.with_overrides(
        dataset_dir=args.dataset,
        model=args.model,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        image_size=args.image_size,
        seed=args.seed,
        work_dir=args.work_dir,
    )
    artifact = train(config)
    print(f"model artifact: {artifact}")
    return 0


def _cmd_infer(args) -> int:
    images_dir = Path(args.images)
    if not images_dir.is_dir():
        raise AdapterError(f"images directory {images_dir} does not exist")
    predictor = load_predictor(args.model)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    image_paths = sorted(
        p for p in images_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    for image_path in image_paths:
        boxes, width, height = predictor.predict(image_path, args.conf_floor)
        write_prediction_file(
            boxes, width, height, out_dir / (image_path.stem + ".txt")
        )
        total += len(boxes)
    print(f"wrote {len(image_paths)} prediction file(s), {total} detection(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="train/run a detector on a vibspect dataset; export toolkit predictions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a toolkit dataset")
    p.add_argument("--config", help="JSON AdapterConfig file")
    p.add_argument("--dataset", help="dataset directory (toolkit layout)")
    p.add_argument("--model", help="'micro' or 'ultralytics:<variant>' (default micro)")
    p.add_argument("--epochs", type=int, help="training epochs (default 500)")
    p.add_argument("--batch-size", type=int, help="batch size (default 8)")
    p.add_argument("--learning-rate", type=float, help="SGD learning rate (default 0.01)")
    p.add_argument("--image-size", type=int, help="model input size (default 640)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--work-dir", help="output directory for artifacts (default adapter_work)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer", help="run a trained model over an image directory")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--images", required=True, help="directory of images")
    p.add_argument("--out", required=True, help="output directory for prediction files")
    p.add_argument(
        "--conf-floor",
        type=float,
        default=0.25,
        help="minimum confidence to keep a detection (default 0.25)",
    )
    p.set_defaults(func=_cmd_infer)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
