"""Toolkit dataset layout: validation and trainer data-description emission."""

from __future__ import annotations

import json
from pathlib import Path

from vibspect_adapter.config import AdapterError

SPLITS = ("train", "val", "test")


def validate_dataset_layout(dataset_dir: str | Path) -> dict:
    """Check the images/labels/manifest layout; return the parsed manifest."""
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise AdapterError(f"dataset directory {dataset_dir} does not exist")
    for sub in ("images", "labels"):
        base = dataset_dir / sub
        if not base.is_dir():
            raise AdapterError(f"dataset layout invalid: missing {base}")
        for split in SPLITS:
            if not (base / split).is_dir():
                raise AdapterError(f"dataset layout invalid: missing {base / split}")
    manifest_path = dataset_dir / "manifest.json"
    if not manifest_path.is_file():
        raise AdapterError(f"dataset layout invalid: missing {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AdapterError(f"malformed manifest {manifest_path}: {exc}") from exc
    if "class_names" not in manifest or not manifest["class_names"]:
        raise AdapterError(f"manifest {manifest_path} lists no class names")
    return manifest


def write_data_description(dataset_dir: str | Path, out_path: str | Path) -> Path:
    """Emit the YAML data description a detector trainer expects.

    Derived from the toolkit manifest; written outside the dataset
    directory (the adapter is a read-only consumer of it).
    """
    dataset_dir = Path(dataset_dir).resolve()
    manifest = validate_dataset_layout(dataset_dir)
    out_path = Path(out_path)
    if dataset_dir in out_path.resolve().parents:
        raise AdapterError("refusing to write inside the dataset directory")
    lines = [
        f"path: {dataset_dir}",
        "train: images/train",
        "val: images/val",
        "test: images/test",
        "names:",
    ]
    lines += [f"  {i}: {name}" for i, name in enumerate(manifest["class_names"])]
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path


def split_images(dataset_dir: str | Path, split: str) -> list[Path]:
    """Image files of one split, sorted by name."""
    return sorted((Path(dataset_dir) / "images" / split).glob("*.png"))
