"""Adapter configuration and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path


class AdapterError(ValueError):
    """Invalid configuration or dataset layout."""


@dataclass(frozen=True)
class AdapterConfig:
    """Training configuration.

    `model` selects the backend: "micro" is the built-in minimal detector;
    "ultralytics:<variant>" delegates to the ultralytics runtime when that
    package is installed.
    """

    dataset_dir: str
    model: str = "micro"
    epochs: int = 500
    batch_size: int = 8
    learning_rate: float = 0.01
    image_size: int = 640
    seed: int = 0
    work_dir: str = "adapter_work"

    def validate(self) -> None:
        if not self.dataset_dir:
            raise AdapterError("dataset_dir is required")
        if self.epochs < 1:
            raise AdapterError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise AdapterError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise AdapterError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.image_size < 32 or self.image_size % 32 != 0:
            raise AdapterError(
                f"image_size must be a positive multiple of 32, got {self.image_size}"
            )

    def with_overrides(self, **kwargs) -> "AdapterConfig":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided)


def load_adapter_config(path: str | Path) -> AdapterConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise AdapterError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise AdapterError(f"malformed config {path}: {exc}") from exc
    known = set(AdapterConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise AdapterError(f"unknown config keys: {sorted(unknown)}")
    if "dataset_dir" not in data:
        raise AdapterError(f"config {path} must set dataset_dir")
    return AdapterConfig(**data)
