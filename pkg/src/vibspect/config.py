"""Pipeline configuration shared by the dataset builder and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from vibspect.errors import DataError
from vibspect.render import COLORMAPS


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the signal -> dataset pipeline, with its defaults.

    f_min_hz/f_max_hz of None mean rate/500 and rate/4 for each signal's
    own sample rate. augmentation_multiplier is the total number of train
    copies per original image (1 = no augmentation).
    """

    window_len: int = 2048
    overlap: float = 0.5
    num_scales: int = 64
    f_min_hz: float | None = None
    f_max_hz: float | None = None
    image_size: int = 640
    colormap: str = "grayscale"
    train_ratio: float = 0.8
    val_ratio: float = 0.1
    test_ratio: float = 0.1
    augmentation_multiplier: int = 2
    max_rotation_deg: float = 5.0
    contrast_range: tuple[float, float] = (0.8, 1.2)
    energy_quantile: float = 0.90
    log_epsilon: float = 1e-10
    seed: int = 0
    jobs: int = 1

    @property
    def ratios(self) -> tuple[float, float, float]:
        return (self.train_ratio, self.val_ratio, self.test_ratio)

    def validate(self) -> None:
        if self.window_len <= 0:
            raise DataError("window_len must be positive")
        if not 0.0 <= self.overlap < 1.0:
            raise DataError("overlap must be in [0,1)")
        if self.num_scales < 2:
            raise DataError("num_scales must be at least 2")
        if self.image_size <= 0:
            raise DataError("image_size must be positive")
        if self.colormap not in COLORMAPS:
            raise DataError(f"colormap must be one of {COLORMAPS}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise DataError(f"split ratios must sum to 1, got {self.ratios}")
        if min(self.ratios) < 0:
            raise DataError("split ratios must be nonnegative")
        if self.augmentation_multiplier < 1:
            raise DataError("augmentation_multiplier must be at least 1")
        if not 0.0 <= self.max_rotation_deg <= 5.0:
            raise DataError("max_rotation_deg must be in [0,5]")
        lo, hi = self.contrast_range
        if not 0.8 <= lo <= hi <= 1.2:
            raise DataError("contrast_range must lie inside [0.8,1.2]")
        if not 0.0 < self.energy_quantile < 1.0:
            raise DataError("energy_quantile must be in (0,1)")
        if self.log_epsilon <= 0:
            raise DataError("log_epsilon must be positive")
        if self.jobs < 1:
            raise DataError("jobs must be at least 1")
        if self.f_min_hz is not None and self.f_max_hz is not None:
            if not 0 < self.f_min_hz < self.f_max_hz:
                raise DataError("need 0 < f_min_hz < f_max_hz")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["contrast_range"] = list(self.contrast_range)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        if "contrast_range" in data:
            data = dict(data)
            data["contrast_range"] = tuple(data["contrast_range"])
        return cls(**data)

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided)


def load_config(path: str | Path) -> PipelineConfig:
    """Read a JSON config file into a PipelineConfig."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"config {path} must hold a JSON object")
    return PipelineConfig.from_dict(data)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    """Echo the effective config as canonical JSON (provenance record)."""
    text = json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")
