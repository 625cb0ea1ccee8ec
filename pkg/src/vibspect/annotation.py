"""YOLO-format bounding-box labels and the four-class fault taxonomy.

Label files carry one `class_id x_center y_center width height` line per box,
prediction files append a trailing confidence column. All coordinates are
normalized to image dimensions and written with six decimal places.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from vibspect.errors import DataError
from vibspect.render import log_normalize

# Slack for box-inside-image checks. Center and size are rounded to six
# decimals independently in label files, which can push an edge out by up
# to 7.5e-7; two file quanta of slack absorbs that while still rejecting
# any real violation.
_EDGE_EPS = 2e-6


class FaultClass(enum.IntEnum):
    """Bearing condition classes with their fixed YOLO class ids."""

    NORMAL = 0
    BALL = 1
    INNER_RACE = 2
    OUTER_RACE = 3

    @property
    def label(self) -> str:
        return _CLASS_LABELS[self.value]

    @classmethod
    def from_id(cls, class_id: int) -> "FaultClass":
        try:
            return cls(class_id)
        except ValueError:
            raise ValueError(f"unknown class id {class_id}") from None

    @classmethod
    def from_label(cls, label: str) -> "FaultClass":
        try:
            return cls(_CLASS_LABELS.index(label))
        except ValueError:
            raise ValueError(f"unknown class label {label!r}") from None


_CLASS_LABELS = ("Normal", "Ball", "InnerRace", "OuterRace")

#: Class names in id order, as written to dataset description files.
CLASS_NAMES: tuple[str, ...] = _CLASS_LABELS


@dataclass(frozen=True)
class Annotation:
    """One normalized bounding box: center, size, and fault class.

    The box must lie inside the unit square; width and height must be
    positive. Violations raise ValueError at construction time.
    """

    fault_class: FaultClass
    x_center: float
    y_center: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if not (0.0 < self.width <= 1.0 and 0.0 < self.height <= 1.0):
            raise ValueError(
                f"box size out of range: width={self.width} height={self.height}"
            )
        for name, c, s in (
            ("x", self.x_center, self.width),
            ("y", self.y_center, self.height),
        ):
            if c - s / 2 < -_EDGE_EPS or c + s / 2 > 1.0 + _EDGE_EPS:
                raise ValueError(
                    f"box exceeds image bounds: {name}_center={c} with extent {s}"
                )

    def corners(self) -> tuple[float, float, float, float]:
        """Return (x_min, y_min, x_max, y_max)."""
        return (
            self.x_center - self.width / 2,
            self.y_center - self.height / 2,
            self.x_center + self.width / 2,
            self.y_center + self.height / 2,
        )


@dataclass(frozen=True)
class Detection:
    """A predicted box plus its confidence score."""

    annotation: Annotation
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")


def _format_box(ann: Annotation) -> str:
    return (
        f"{int(ann.fault_class)} {ann.x_center:.6f} {ann.y_center:.6f} "
        f"{ann.width:.6f} {ann.height:.6f}"
    )


def write_labels(annotations: list[Annotation], path: str | Path) -> None:
    """Write annotations as YOLO label lines; an empty list yields an empty file."""
    lines = [_format_box(a) + "\n" for a in annotations]
    Path(path).write_text("".join(lines), encoding="utf-8")


def write_predictions(detections: list[Detection], path: str | Path) -> None:
    """Write detections as label lines extended with a confidence column."""
    lines = [
        f"{_format_box(d.annotation)} {d.confidence:.6f}\n" for d in detections
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def _parse_lines(path: str | Path, n_fields: int):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != n_fields:
            raise DataError(
                f"{path}: expected {n_fields} fields at line {lineno}, "
                f"got {len(fields)}"
            )
        try:
            class_id = int(fields[0])
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise DataError(f"{path}: non-numeric field at line {lineno}") from None
        if not 0 <= class_id <= 3:
            raise DataError(f"{path}: unknown class id {class_id} at line {lineno}")
        if not all(np.isfinite(values)):
            raise DataError(f"{path}: non-finite value at line {lineno}")
        yield lineno, class_id, values


def parse_labels(path: str | Path) -> list[Annotation]:
    """Parse a YOLO label file, validating every box.

    Raises DataError with the offending line number for malformed lines,
    unknown class ids, or boxes that leave the unit square.
    """
    annotations = []
    for lineno, class_id, values in _parse_lines(path, 5):
        try:
            annotations.append(Annotation(FaultClass(class_id), *values))
        except ValueError as exc:
            raise DataError(f"{path}: {exc} at line {lineno}") from None
    return annotations


def parse_predictions(path: str | Path) -> list[Detection]:
    """Parse a prediction file (label format plus confidence).

    An empty file is a valid no-detection result.
    """
    detections = []
    for lineno, class_id, values in _parse_lines(path, 6):
        *box, confidence = values
        try:
            detections.append(
                Detection(Annotation(FaultClass(class_id), *box), confidence)
            )
        except ValueError as exc:
            raise DataError(f"{path}: {exc} at line {lineno}") from None
    return detections


def synthesize_annotation(
    scalogram,
    label: FaultClass,
    energy_quantile: float = 0.90,
    margin: float = 0.02,
) -> Annotation:
    """Box the high-energy region of a scalogram as a normalized annotation.

    The box is the tight axis-aligned hull of pixels whose log-normalized
    value exceeds the given quantile, grown by `margin` on every side and
    clipped to the image. Stands in for hand-drawn boxes so dataset builds
    are reproducible.
    """
    if not 0.0 < energy_quantile < 1.0:
        raise ValueError(f"energy_quantile must be in (0,1), got {energy_quantile}")
    matrix = log_normalize(scalogram)
    if matrix.max() == matrix.min():
        raise DataError("no energy concentration: scalogram is constant")
    threshold = np.quantile(matrix, energy_quantile)
    mask = matrix > threshold
    if not mask.any():
        mask = matrix >= threshold
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    n_rows, n_cols = matrix.shape
    x0 = max(cols[0] / n_cols - margin, 0.0)
    x1 = min((cols[-1] + 1) / n_cols + margin, 1.0)
    y0 = max(rows[0] / n_rows - margin, 0.0)
    y1 = min((rows[-1] + 1) / n_rows + margin, 1.0)
    return Annotation(
        fault_class=label,
        x_center=(x0 + x1) / 2,
        y_center=(y0 + y1) / 2,
        width=x1 - x0,
        height=y1 - y0,
    )
