"""Backend dispatch: built-in micro detector or the ultralytics runtime.

The model id picks the backend: "micro" (default) trains the bundled
minimal detector; "ultralytics:<variant>" (e.g. "ultralytics:yolo11n")
delegates to the ultralytics package, which must be installed separately.
Either way the detector itself is a black box to the adapter; only its
pixel-box outputs are consumed.
"""

from __future__ import annotations

from pathlib import Path

from vibspect_adapter.config import AdapterConfig, AdapterError
from vibspect_adapter.layout import validate_dataset_layout, write_data_description
from vibspect_adapter.predictions import PixelBox
from vibspect_adapter import micro

ULTRA_PREFIX = "ultralytics:"


def train(config: AdapterConfig) -> Path:
    """Train per the config; returns the model artifact path."""
    config.validate()
    manifest = validate_dataset_layout(config.dataset_dir)
    class_names = list(manifest["class_names"])
    work_dir = Path(config.work_dir)
    data_yaml = write_data_description(config.dataset_dir, work_dir / "data.yaml")
    if config.model == "micro":
        return micro.train_micro(config, class_names)
    if config.model.startswith(ULTRA_PREFIX):
        return _train_ultralytics(config, data_yaml)
    raise AdapterError(
        f"unknown model id {config.model!r}; use 'micro' or 'ultralytics:<variant>'"
    )


def load_predictor(model_artifact: str | Path):
    """Load the artifact once; returns an object with .predict(path, floor).

    Micro artifacts are recognized by their payload; anything else is
    handed to the ultralytics runtime.
    """
    artifact = Path(model_artifact)
    if not artifact.exists():
        raise AdapterError(f"model artifact {artifact} does not exist")
    try:
        return micro.MicroPredictor(artifact)
    except AdapterError as micro_error:
        try:
            return _UltralyticsPredictor(artifact)
        except AdapterError:
            raise AdapterError(
                f"{micro_error}; and the ultralytics runtime is not installed "
                f"to try it as an ultralytics artifact"
            ) from None


def _require_ultralytics():
    try:
        from ultralytics import YOLO
    except ImportError as exc:
        raise AdapterError(
            "the ultralytics package is not installed; install it or use the "
            "built-in 'micro' model"
        ) from exc
    return YOLO


def _train_ultralytics(config: AdapterConfig, data_yaml: Path) -> Path:
    YOLO = _require_ultralytics()
    variant = config.model[len(ULTRA_PREFIX) :]
    # Build from the architecture yaml: no pretrained-weight download.
    model = YOLO(f"{variant}.yaml")
    results = model.train(
        data=str(data_yaml),
        epochs=config.epochs,
        batch=config.batch_size,
        lr0=config.learning_rate,
        imgsz=config.image_size,
        seed=config.seed,
        project=str(Path(config.work_dir) / "runs"),
        verbose=False,
    )
    best = Path(results.save_dir) / "weights" / "best.pt"
    if not best.exists():
        raise AdapterError(f"training finished but no artifact at {best}")
    return best


class _UltralyticsPredictor:
    def __init__(self, artifact: Path):
        YOLO = _require_ultralytics()
        self.model = YOLO(str(artifact))

    def predict(
        self, image_path: str | Path, confidence_floor: float
    ) -> tuple[list[PixelBox], int, int]:
        (result,) = self.model.predict(
            str(image_path), conf=confidence_floor, verbose=False
        )
        height, width = result.orig_shape
        boxes = [
            PixelBox(
                class_id=int(cls),
                x0=float(x0),
                y0=float(y0),
                x1=float(x1),
                y1=float(y1),
                confidence=float(conf),
            )
            for (x0, y0, x1, y1), cls, conf in zip(
                result.boxes.xyxy.tolist(),
                result.boxes.cls.tolist(),
                result.boxes.conf.tolist(),
            )
        ]
        return boxes, int(width), int(height)
