"""Toolkit label/prediction text formats and pixel-box conversion.

The interchange contract with the toolkit: label files carry
`class_id x_center y_center width height` per line, prediction files add
a trailing confidence, all normalized to the image and printed with six
decimals. Model runtimes hand back boxes in pixel corners; conversion to
normalized center/size uses each image's actual dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class PixelBox:
    """Runtime output: class id, pixel corners, confidence."""

    class_id: int
    x0: float
    y0: float
    x1: float
    y1: float
    confidence: float


def read_label_boxes(path: str | Path) -> list[tuple[int, float, float, float, float]]:
    """Read a toolkit label file into (class_id, x, y, w, h) tuples."""
    boxes = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        boxes.append((int(fields[0]), *(float(f) for f in fields[1:5])))
    return boxes


def pixel_boxes_to_lines(
    boxes: list[PixelBox],
    image_width: int,
    image_height: int,
) -> list[str]:
    """Convert pixel-corner boxes to normalized prediction lines.

    Boxes are clamped to the image; degenerate leftovers are dropped and
    confidences clipped to [0,1].
    """
    lines = []
    for box in boxes:
        x0 = min(max(box.x0, 0.0), image_width)
        x1 = min(max(box.x1, 0.0), image_width)
        y0 = min(max(box.y0, 0.0), image_height)
        y1 = min(max(box.y1, 0.0), image_height)
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            continue
        x = (x0 + x1) / 2.0 / image_width
        y = (y0 + y1) / 2.0 / image_height
        w = (x1 - x0) / image_width
        h = (y1 - y0) / image_height
        conf = min(max(box.confidence, 0.0), 1.0)
        lines.append(
            f"{box.class_id} {x:.6f} {y:.6f} {w:.6f} {h:.6f} {conf:.6f}"
        )
    return lines


def write_prediction_file(
    boxes: list[PixelBox],
    image_width: int,
    image_height: int,
    path: str | Path,
) -> None:
    """Write one prediction file; no detections yields an empty file."""
    lines = pixel_boxes_to_lines(boxes, image_width, image_height)
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
