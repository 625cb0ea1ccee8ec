"""Assemble (image, label) pairs into split datasets with train-only augmentation.

Split sizes follow largest-remainder apportionment of the configured
ratios, stratified per class when class labels are available. Augmented
copies (horizontal flip, rotation within +-5 degrees, contrast jitter) are
generated for the train split only, so val and test never see derived
samples. Output layout:

    out_dir/images/{train,val,test}/*.png
    out_dir/labels/{train,val,test}/*.txt
    out_dir/classes.txt        class names in id order
    out_dir/manifest.json      entries, counts, seed
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from vibspect.annotation import (
    CLASS_NAMES,
    Annotation,
    synthesize_annotation,
    write_labels,
)
from vibspect.config import PipelineConfig
from vibspect.cwt import cwt_fft, make_scale_grid
from vibspect.errors import DataError
from vibspect.render import SpectrogramImage, bilinear_sample, make_spectrogram_image, render_png
from vibspect.segmentation import segment_signal
from vibspect.signal_io import Signal

SPLIT_NAMES = ("train", "val", "test")

# Rotated boxes whose clipped hull keeps less than this fraction of the
# original area are dropped as degenerate slivers.
MIN_RESIDUAL_AREA_FRACTION = 0.10


def _snap(value: float) -> float:
    # Keep coordinates on the label file's 1e-6 grid so mirror operations
    # are exact involutions on file-borne boxes.
    return round(value * 1e6) / 1e6


@dataclass(frozen=True)
class ManifestEntry:
    image: str
    label: str
    split: str
    fault_class: str | None
    augmentations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "image": self.image,
            "label": self.label,
            "split": self.split,
            "fault_class": self.fault_class,
            "augmentations": list(self.augmentations),
        }


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    class_names: tuple[str, ...]
    seed: int
    counts: dict[str, int]
    original_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "class_names": list(self.class_names),
            "seed": self.seed,
            "counts": dict(self.counts),
            "original_counts": dict(self.original_counts),
        }


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    text = json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from exc
    try:
        entries = tuple(
            ManifestEntry(
                image=e["image"],
                label=e["label"],
                split=e["split"],
                fault_class=e.get("fault_class"),
                augmentations=tuple(e.get("augmentations", ())),
            )
            for e in data["entries"]
        )
        return DatasetManifest(
            entries=entries,
            class_names=tuple(data["class_names"]),
            seed=data["seed"],
            counts=dict(data["counts"]),
            original_counts=dict(data.get("original_counts", data["counts"])),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"manifest {path} missing field: {exc}") from exc


def largest_remainder(total: int, ratios: tuple[float, ...]) -> list[int]:
    """Apportion `total` into integer counts proportional to `ratios`.

    Floors the quotas, then hands the leftover units to the largest
    fractional remainders; remainder ties go to the earlier position.
    """
    if total < 0:
        raise ValueError("total must be nonnegative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    quotas = [total * r for r in ratios]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_remainder[:leftover]:
        counts[i] += 1
    return counts


def assign_splits(
    class_keys: list,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> list[str]:
    """Assign one split name per item, stratified by the given class keys.

    Global split sizes are the largest-remainder apportionment of the
    ratios and are honored exactly; within that budget each class is
    spread as proportionally as the integer counts allow. Items without a
    class key (None) form their own stratum. Deterministic in `seed`.
    """
    n = len(class_keys)
    if n == 0:
        raise DataError("cannot split an empty item list")
    targets = largest_remainder(n, ratios)

    groups: dict = {}
    for idx, key in enumerate(class_keys):
        groups.setdefault(key, []).append(idx)

    rng = np.random.default_rng(seed)
    for key in groups:
        members = groups[key]
        order = rng.permutation(len(members))
        groups[key] = [members[i] for i in order]

    group_keys = list(groups)
    counts = {key: [math.floor(len(groups[key]) * r) for r in ratios] for key in group_keys}
    committed = [sum(counts[key][s] for key in group_keys) for s in range(3)]
    need = {key: len(groups[key]) - sum(counts[key]) for key in group_keys}

    # Hand out leftover units by largest per-class remainder, never
    # exceeding the global per-split targets.
    candidates = sorted(
        (
            (-(len(groups[key]) * ratios[s] - counts[key][s]), gi, s)
            for gi, key in enumerate(group_keys)
            for s in range(3)
        ),
    )
    while any(need[key] > 0 for key in group_keys):
        progressed = False
        for _, gi, s in candidates:
            key = group_keys[gi]
            if need[key] > 0 and committed[s] < targets[s]:
                counts[key][s] += 1
                committed[s] += 1
                need[key] -= 1
                progressed = True
        if not progressed:
            raise RuntimeError("split apportionment failed to converge")

    assignment = [""] * n
    for key in group_keys:
        members = groups[key]
        c_train, c_val, _ = counts[key]
        for pos, idx in enumerate(members):
            if pos < c_train:
                assignment[idx] = "train"
            elif pos < c_train + c_val:
                assignment[idx] = "val"
            else:
                assignment[idx] = "test"
    return assignment


def split_dataset(
    items: list[tuple[str, str]],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    class_keys: list | None = None,
) -> DatasetManifest:
    """Build a manifest assigning existing (image, label) pairs to splits."""
    if not items:
        raise DataError("cannot split an empty item list")
    images = [image for image, _ in items]
    if len(set(images)) != len(images):
        duplicates = sorted({i for i in images if images.count(i) > 1})
        raise DataError(f"duplicate image paths: {duplicates[:5]}")
    if class_keys is None:
        class_keys = [None] * len(items)
    splits = assign_splits(class_keys, ratios, seed)
    entries = tuple(
        ManifestEntry(
            image=image,
            label=label,
            split=split,
            fault_class=str(key) if key is not None else None,
        )
        for (image, label), split, key in zip(items, splits, class_keys)
    )
    counts = {name: splits.count(name) for name in SPLIT_NAMES}
    return DatasetManifest(
        entries=entries,
        class_names=CLASS_NAMES,
        seed=seed,
        counts=counts,
        original_counts=dict(counts),
    )


def flip_horizontal(
    image: SpectrogramImage,
    annotations: list[Annotation],
) -> tuple[SpectrogramImage, list[Annotation]]:
    """Mirror pixels about the vertical axis and reflect box centers."""
    flipped = SpectrogramImage(
        pixels=np.fliplr(image.pixels),
        colormap=image.colormap,
        provenance=image.provenance,
    )
    boxes = [
        Annotation(
            fault_class=a.fault_class,
            x_center=_snap(1.0 - a.x_center),
            y_center=a.y_center,
            width=a.width,
            height=a.height,
        )
        for a in annotations
    ]
    return flipped, boxes


def rotate_small(
    image: SpectrogramImage,
    annotations: list[Annotation],
    angle_deg: float,
) -> tuple[SpectrogramImage, list[Annotation]]:
    """Rotate image content about its center by at most +-5 degrees.

    Pixels are bilinearly resampled with zero fill outside the frame. Each
    box becomes the axis-aligned hull of its four rotated corners, clipped
    to the image; boxes keeping less than 10% of their original area are
    dropped.
    """
    if abs(angle_deg) > 5.0:
        raise ValueError(f"rotation angle must be within +-5 degrees, got {angle_deg}")
    if angle_deg == 0.0:
        return image, list(annotations)

    pixels = image.pixels
    h, w = pixels.shape
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    center_r = (h - 1) / 2.0
    center_c = (w - 1) / 2.0

    out_r, out_c = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dr = out_r - center_r
    dc = out_c - center_c
    # Inverse map: source = R(-theta) . (dest - center) + center.
    src_c = cos_t * dc + sin_t * dr + center_c
    src_r = -sin_t * dc + cos_t * dr + center_r
    rotated = bilinear_sample(pixels, src_r, src_c, fill=0.0)
    rotated = np.clip(rotated, 0.0, 1.0)
    out_image = SpectrogramImage(
        pixels=rotated, colormap=image.colormap, provenance=image.provenance
    )

    boxes = []
    for a in annotations:
        x0, y0, x1, y1 = a.corners()
        corners_c = np.array([x0, x1, x1, x0]) * w - 0.5
        corners_r = np.array([y0, y0, y1, y1]) * h - 0.5
        dc = corners_c - center_c
        dr = corners_r - center_r
        # Forward map for content: dest = R(theta) . (src - center) + center.
        new_c = cos_t * dc - sin_t * dr + center_c
        new_r = sin_t * dc + cos_t * dr + center_r
        nx0 = max((new_c.min() + 0.5) / w, 0.0)
        nx1 = min((new_c.max() + 0.5) / w, 1.0)
        ny0 = max((new_r.min() + 0.5) / h, 0.0)
        ny1 = min((new_r.max() + 0.5) / h, 1.0)
        if nx1 <= nx0 or ny1 <= ny0:
            continue
        if (nx1 - nx0) * (ny1 - ny0) < MIN_RESIDUAL_AREA_FRACTION * a.width * a.height:
            continue
        nx0, nx1, ny0, ny1 = _snap(nx0), _snap(nx1), _snap(ny0), _snap(ny1)
        boxes.append(
            Annotation(
                fault_class=a.fault_class,
                x_center=(nx0 + nx1) / 2,
                y_center=(ny0 + ny1) / 2,
                width=nx1 - nx0,
                height=ny1 - ny0,
            )
        )
    return out_image, boxes


def contrast_jitter(image: SpectrogramImage, factor: float) -> SpectrogramImage:
    """Scale pixel deviation from the image mean by `factor`, clamped to [0,1]."""
    if not 0.8 <= factor <= 1.2:
        raise ValueError(f"contrast factor must be in [0.8,1.2], got {factor}")
    pixels = image.pixels
    if pixels.max() == pixels.min():
        return image
    mean = float(pixels.mean())
    adjusted = np.clip(pixels + (factor - 1.0) * (pixels - mean), 0.0, 1.0)
    return SpectrogramImage(
        pixels=adjusted, colormap=image.colormap, provenance=image.provenance
    )


def _augment(
    image: SpectrogramImage,
    annotations: list[Annotation],
    rng: np.random.Generator,
    max_rotation_deg: float,
    contrast_range: tuple[float, float],
) -> tuple[SpectrogramImage, list[Annotation], tuple[str, ...]]:
    tags = []
    if rng.random() < 0.5:
        image, annotations = flip_horizontal(image, annotations)
        tags.append("flip")
    angle = float(rng.uniform(-max_rotation_deg, max_rotation_deg))
    image, annotations = rotate_small(image, annotations, angle)
    tags.append(f"rotate{angle:+.2f}")
    factor = float(rng.uniform(*contrast_range))
    image = contrast_jitter(image, factor)
    tags.append(f"contrast{factor:.3f}")
    return image, annotations, tuple(tags)


def _transform_signal(signal: Signal, index: int, config: PipelineConfig):
    """Segment one signal and produce (name, image, annotations) originals."""
    rate = signal.sample_rate_hz
    f_min = config.f_min_hz if config.f_min_hz is not None else rate / 500.0
    f_max = config.f_max_hz if config.f_max_hz is not None else rate / 4.0
    grid = make_scale_grid(f_min, f_max, config.num_scales, rate)
    originals = []
    for seg_idx, segment in enumerate(
        segment_signal(signal, config.window_len, config.overlap)
    ):
        name = f"sig{index:03d}_seg{seg_idx:03d}"
        scalogram = cwt_fft(segment, grid)
        annotations = []
        if segment.inherited_label is not None:
            annotations = [
                synthesize_annotation(
                    scalogram, segment.inherited_label, config.energy_quantile
                )
            ]
        image = make_spectrogram_image(
            scalogram,
            out_h=config.image_size,
            out_w=config.image_size,
            colormap=config.colormap,
            provenance=name,
            epsilon=config.log_epsilon,
        )
        originals.append((name, image, annotations))
    return originals


def build_dataset(
    signals: list[Signal],
    config: PipelineConfig,
    out_dir: str | Path,
) -> DatasetManifest:
    """Run segment -> transform -> render -> annotate and write a split dataset.

    Deterministic for a fixed config seed: the same inputs produce
    byte-identical images, labels, and manifest. Augmented copies carry
    their source's split (train only) and are tagged in the manifest.
    """
    config.validate()
    if not signals:
        raise DataError("no input signals")
    out_dir = Path(out_dir)
    for sub in ("images", "labels"):
        for split in SPLIT_NAMES:
            (out_dir / sub / split).mkdir(parents=True, exist_ok=True)

    def transform(args):
        idx, signal = args
        try:
            return _transform_signal(signal, idx, config)
        except (DataError, ValueError) as exc:
            raise DataError(f"signal {idx}: {exc}") from exc

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            per_signal = list(pool.map(transform, enumerate(signals)))
    else:
        per_signal = [transform(item) for item in enumerate(signals)]

    originals = [item for group in per_signal for item in group]
    class_keys = [
        anns[0].fault_class if anns else None for _, _, anns in originals
    ]
    splits = assign_splits(class_keys, config.ratios, config.seed)

    entries = []
    for item_idx, ((name, image, annotations), split) in enumerate(
        zip(originals, splits)
    ):
        label = annotations[0].fault_class.label if annotations else None
        entries.append(
            _write_pair(out_dir, name, split, image, annotations, label, ())
        )
        if split == "train":
            for copy_idx in range(config.augmentation_multiplier - 1):
                rng = np.random.default_rng([config.seed, item_idx, copy_idx])
                aug_image, aug_anns, tags = _augment(
                    image,
                    annotations,
                    rng,
                    config.max_rotation_deg,
                    config.contrast_range,
                )
                entries.append(
                    _write_pair(
                        out_dir,
                        f"{name}_aug{copy_idx:02d}",
                        split,
                        aug_image,
                        aug_anns,
                        label,
                        tags,
                    )
                )

    entries.sort(key=lambda e: e.image)
    counts = {s: sum(1 for e in entries if e.split == s) for s in SPLIT_NAMES}
    original_counts = {s: splits.count(s) for s in SPLIT_NAMES}
    manifest = DatasetManifest(
        entries=tuple(entries),
        class_names=CLASS_NAMES,
        seed=config.seed,
        counts=counts,
        original_counts=original_counts,
    )
    write_manifest(manifest, out_dir / "manifest.json")
    (out_dir / "classes.txt").write_text(
        "".join(f"{name}\n" for name in CLASS_NAMES), encoding="utf-8"
    )
    return manifest


def _write_pair(
    out_dir: Path,
    name: str,
    split: str,
    image: SpectrogramImage,
    annotations: list[Annotation],
    fault_class: str | None,
    tags: tuple[str, ...],
) -> ManifestEntry:
    image_rel = f"images/{split}/{name}.png"
    label_rel = f"labels/{split}/{name}.txt"
    render_png(image, out_dir / image_rel)
    write_labels(annotations, out_dir / label_rel)
    return ManifestEntry(
        image=image_rel,
        label=label_rel,
        split=split,
        fault_class=fault_class,
        augmentations=tags,
    )
