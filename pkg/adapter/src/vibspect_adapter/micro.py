"""Built-in minimal grid detector (torch) used as the default runtime.

A small stride-32 convolutional backbone predicts, per grid cell, box
offsets, objectness, and class logits; training minimizes the usual
composite of localization, objectness, and classification terms. It
exists so the adapter's train/infer contract is exercisable on CPU
without any external model runtime; it is not meant to be competitive.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch import nn

from vibspect_adapter.config import AdapterConfig, AdapterError
from vibspect_adapter.layout import split_images, validate_dataset_layout
from vibspect_adapter.predictions import PixelBox, read_label_boxes

STRIDE = 32
ARTIFACT_FORMAT = "vibspect-adapter-micro-v1"


class MicroDetector(nn.Module):
    def __init__(self, num_classes: int, width: int = 16):
        super().__init__()
        self.num_classes = num_classes
        channels = [1, width, width * 2, width * 2, width * 4, width * 4]
        blocks = []
        for c_in, c_out in zip(channels, channels[1:]):
            blocks += [nn.Conv2d(c_in, c_out, 3, stride=2, padding=1), nn.SiLU()]
        self.backbone = nn.Sequential(*blocks)
        self.head = nn.Conv2d(channels[-1], 5 + num_classes, 1)

    def forward(self, x):
        # (B, 5+nc, S, S): tx, ty, tw, th, objectness, class logits.
        return self.head(self.backbone(x))


def _load_image(path: Path, image_size: int) -> tuple[torch.Tensor, int, int]:
    with Image.open(path) as img:
        width, height = img.size
        gray = img.convert("L").resize((image_size, image_size), Image.BILINEAR)
    array = np.asarray(gray, dtype=np.float32) / 255.0
    return torch.from_numpy(array)[None, :, :], width, height


def _targets_for(
    boxes: list[tuple[int, float, float, float, float]],
    grid: int,
    num_classes: int,
):
    obj = torch.zeros(grid, grid)
    txy = torch.zeros(2, grid, grid)
    twh = torch.zeros(2, grid, grid)
    cls = torch.zeros(grid, grid, dtype=torch.long)
    for class_id, x, y, w, h in boxes:
        col = min(int(x * grid), grid - 1)
        row = min(int(y * grid), grid - 1)
        obj[row, col] = 1.0
        txy[0, row, col] = x * grid - col
        txy[1, row, col] = y * grid - row
        twh[0, row, col] = w
        twh[1, row, col] = h
        cls[row, col] = class_id
    return obj, txy, twh, cls


def _composite_loss(pred, obj, txy, twh, cls):
    pred_xy = torch.sigmoid(pred[:, 0:2])
    pred_wh = torch.sigmoid(pred[:, 2:4])
    pred_obj = pred[:, 4]
    pred_cls = pred[:, 5:]
    obj_loss = nn.functional.binary_cross_entropy_with_logits(pred_obj, obj)
    mask = obj > 0.5
    if mask.any():
        mask2 = mask[:, None].expand_as(pred_xy)
        box_loss = nn.functional.mse_loss(pred_xy[mask2], txy[mask2]) + (
            nn.functional.mse_loss(pred_wh[mask2], twh[mask2])
        )
        logits = pred_cls.permute(0, 2, 3, 1)[mask]
        cls_loss = nn.functional.cross_entropy(logits, cls[mask])
    else:
        box_loss = pred.sum() * 0.0
        cls_loss = pred.sum() * 0.0
    return 5.0 * box_loss + obj_loss + cls_loss


def train_micro(config: AdapterConfig, class_names: list[str]) -> Path:
    """Train the built-in detector on the train split; return the artifact path."""
    dataset_dir = Path(config.dataset_dir)
    validate_dataset_layout(dataset_dir)
    image_paths = split_images(dataset_dir, "train")
    if not image_paths:
        raise AdapterError(f"no training images in {dataset_dir / 'images' / 'train'}")
    grid = config.image_size // STRIDE

    torch.manual_seed(config.seed)
    model = MicroDetector(num_classes=len(class_names))
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.learning_rate, momentum=0.9
    )

    samples = []
    for path in image_paths:
        tensor, _, _ = _load_image(path, config.image_size)
        label_path = dataset_dir / "labels" / "train" / (path.stem + ".txt")
        boxes = read_label_boxes(label_path) if label_path.exists() else []
        samples.append((tensor, _targets_for(boxes, grid, len(class_names))))

    generator = torch.Generator().manual_seed(config.seed)
    model.train()
    for epoch in range(config.epochs):
        order = torch.randperm(len(samples), generator=generator).tolist()
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [samples[i] for i in order[start : start + config.batch_size]]
            images = torch.stack([b[0] for b in batch])
            obj = torch.stack([b[1][0] for b in batch])
            txy = torch.stack([b[1][1] for b in batch])
            twh = torch.stack([b[1][2] for b in batch])
            cls = torch.stack([b[1][3] for b in batch])
            optimizer.zero_grad()
            loss = _composite_loss(model(images), obj, txy, twh, cls)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
        print(f"epoch {epoch + 1}/{config.epochs}: loss {epoch_loss:.4f}")

    work_dir = Path(config.work_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    artifact = work_dir / "micro_model.pt"
    torch.save(
        {
            "format": ARTIFACT_FORMAT,
            "state_dict": model.state_dict(),
            "class_names": list(class_names),
            "image_size": config.image_size,
        },
        artifact,
    )
    return artifact


def load_micro(artifact: str | Path) -> tuple[MicroDetector, list[str], int]:
    try:
        payload = torch.load(Path(artifact), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise AdapterError(f"cannot load model artifact {artifact}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != ARTIFACT_FORMAT:
        raise AdapterError(f"{artifact} is not a recognized model artifact")
    model = MicroDetector(num_classes=len(payload["class_names"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["class_names"], payload["image_size"]


def _nms(boxes: list[PixelBox], iou_threshold: float = 0.5) -> list[PixelBox]:
    kept: list[PixelBox] = []
    for box in sorted(boxes, key=lambda b: -b.confidence):
        duplicate = False
        for other in kept:
            if other.class_id != box.class_id:
                continue
            iw = min(box.x1, other.x1) - max(box.x0, other.x0)
            ih = min(box.y1, other.y1) - max(box.y0, other.y0)
            if iw <= 0 or ih <= 0:
                continue
            inter = iw * ih
            union = (box.x1 - box.x0) * (box.y1 - box.y0) + (
                other.x1 - other.x0
            ) * (other.y1 - other.y0) - inter
            if inter / union >= iou_threshold:
                duplicate = True
                break
        if not duplicate:
            kept.append(box)
    return kept


class MicroPredictor:
    """Loaded micro model; predicts pixel boxes in each image's own frame."""

    def __init__(self, artifact: str | Path):
        self.model, self.class_names, self.image_size = load_micro(artifact)

    @torch.no_grad()
    def predict(
        self, image_path: str | Path, confidence_floor: float
    ) -> tuple[list[PixelBox], int, int]:
        try:
            tensor, width, height = _load_image(Path(image_path), self.image_size)
        except OSError as exc:
            raise AdapterError(f"cannot read image {image_path}: {exc}") from exc
        pred = self.model(tensor[None])[0]
        grid = pred.shape[-1]
        class_probs = torch.softmax(pred[5:], dim=0)
        scores = torch.sigmoid(pred[4]) * class_probs.max(dim=0).values
        classes = class_probs.argmax(dim=0)
        xy = torch.sigmoid(pred[0:2])
        wh = torch.sigmoid(pred[2:4])
        boxes = []
        for row in range(grid):
            for col in range(grid):
                score = float(scores[row, col])
                if score < confidence_floor:
                    continue
                x = (col + float(xy[0, row, col])) / grid
                y = (row + float(xy[1, row, col])) / grid
                w = float(wh[0, row, col])
                h = float(wh[1, row, col])
                boxes.append(
                    PixelBox(
                        class_id=int(classes[row, col]),
                        x0=(x - w / 2) * width,
                        y0=(y - h / 2) * height,
                        x1=(x + w / 2) * width,
                        y1=(y + h / 2) * height,
                        confidence=score,
                    )
                )
        return _nms(boxes), width, height
