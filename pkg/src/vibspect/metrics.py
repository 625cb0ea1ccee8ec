"""Score detections against ground truth: IoU matching, AP, mAP@0.5, PRE/REC/F1.

Matching follows the standard detection-benchmark protocol: detections are
processed in descending confidence and greedily claim the unclaimed ground
truth of highest IoU at or above the threshold. AP integrates the all-point
precision envelope over recall; mAP averages AP over the classes present in
the ground truth. Precision, recall, and F1 pool true/false positive counts
over classes (micro averaging) at a confidence cutoff; macro variants are
reported alongside for transparency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from vibspect.annotation import (
    Annotation,
    Detection,
    FaultClass,
    parse_labels,
    parse_predictions,
)
from vibspect.errors import DataError


def iou(a: Annotation, b: Annotation) -> float:
    """Intersection-over-union of two normalized boxes; 0 when disjoint."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # Areas from the same corner arithmetic as the intersection, so
    # identical boxes score exactly 1.
    area_a = (ax1 - ax0) * (ay1 - ay0)
    area_b = (bx1 - bx0) * (by1 - by0)
    return inter / (area_a + area_b - inter)


@dataclass(frozen=True)
class DetectionMatch:
    """Outcome for one detection: the ground truth it claimed, if any."""

    detection: Detection
    matched_gt: int | None
    iou: float


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome for one image and one class."""

    matches: list[DetectionMatch]
    tp: int
    fp: int
    fn: int


def match_detections(
    gts: list[Annotation],
    dets: list[Detection],
    iou_threshold: float = 0.5,
) -> MatchResult:
    """Match detections of one class in one image to ground-truth boxes.

    Detections are visited in descending confidence (ties keep input
    order); each claims the unclaimed ground truth with the highest IoU at
    or above the threshold, ties on IoU resolving to the lowest index.
    Each ground truth is claimed at most once.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    claimed = [False] * len(gts)
    matches: list[DetectionMatch | None] = [None] * len(dets)
    for det_idx in order:
        det = dets[det_idx]
        best_iou = 0.0
        best_gt = None
        for gt_idx, gt in enumerate(gts):
            if claimed[gt_idx]:
                continue
            overlap = iou(gt, det.annotation)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_gt = gt_idx
        if best_gt is not None:
            claimed[best_gt] = True
            matches[det_idx] = DetectionMatch(det, best_gt, best_iou)
        else:
            matches[det_idx] = DetectionMatch(det, None, 0.0)
    tp = sum(1 for m in matches if m.matched_gt is not None)
    return MatchResult(
        matches=list(matches),
        tp=tp,
        fp=len(dets) - tp,
        fn=len(gts) - tp,
    )


def average_precision(
    image_pairs: list[tuple[list[Annotation], list[Detection]]],
    iou_threshold: float = 0.5,
) -> float:
    """All-point interpolated AP for one class across many images.

    Detections are ranked by confidence across all images (ties keep image
    then input order) and matched greedily per image. The precision curve
    is replaced by its running-maximum envelope and integrated over recall.
    Requires at least one ground-truth box.
    """
    n_gt = sum(len(gts) for gts, _ in image_pairs)
    if n_gt == 0:
        raise ValueError("average_precision needs at least one ground-truth box")
    ranked = sorted(
        (
            (img_idx, det_idx)
            for img_idx, (_, dets) in enumerate(image_pairs)
            for det_idx in range(len(dets))
        ),
        key=lambda key: -image_pairs[key[0]][1][key[1]].confidence,
    )
    if not ranked:
        return 0.0
    claimed = [[False] * len(gts) for gts, _ in image_pairs]
    hits = []
    for img_idx, det_idx in ranked:
        gts, dets = image_pairs[img_idx]
        det = dets[det_idx]
        best_iou = 0.0
        best_gt = None
        for gt_idx, gt in enumerate(gts):
            if claimed[img_idx][gt_idx]:
                continue
            overlap = iou(gt, det.annotation)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_gt = gt_idx
        if best_gt is not None:
            claimed[img_idx][best_gt] = True
            hits.append(1)
        else:
            hits.append(0)
    # Precision at each rank, then its backward running maximum (envelope).
    precisions = []
    tp_cum = 0
    for rank, hit in enumerate(hits, start=1):
        tp_cum += hit
        precisions.append(tp_cum / rank)
    envelope = precisions[:]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    # Integrate over recall: each true positive advances recall by 1/n_gt,
    # summed as integers first so a perfect detector scores exactly 1.0.
    area_numerator = sum(env for env, hit in zip(envelope, hits) if hit)
    return area_numerator / n_gt


@dataclass(frozen=True)
class ClassCounts:
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    """Full evaluation summary for one dataset split."""

    per_class_ap: dict[FaultClass, float]
    map50: float
    precision: float
    recall: float
    f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    iou_threshold: float
    confidence_threshold: float
    counts: dict[FaultClass, ClassCounts]
    num_images: int

    def to_dict(self) -> dict:
        return {
            "per_class_ap": {c.label: ap for c, ap in self.per_class_ap.items()},
            "map50": self.map50,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "iou_threshold": self.iou_threshold,
            "confidence_threshold": self.confidence_threshold,
            "counts": {
                c.label: {"tp": cc.tp, "fp": cc.fp, "fn": cc.fn}
                for c, cc in self.counts.items()
            },
            "num_images": self.num_images,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            per_class_ap={
                FaultClass.from_label(name): ap
                for name, ap in data["per_class_ap"].items()
            },
            map50=data["map50"],
            precision=data["precision"],
            recall=data["recall"],
            f1=data["f1"],
            macro_precision=data["macro_precision"],
            macro_recall=data["macro_recall"],
            macro_f1=data["macro_f1"],
            iou_threshold=data["iou_threshold"],
            confidence_threshold=data["confidence_threshold"],
            counts={
                FaultClass.from_label(name): ClassCounts(cc["tp"], cc["fp"], cc["fn"])
                for name, cc in data["counts"].items()
            },
            num_images=data["num_images"],
        )

    def format_table(self) -> str:
        lines = [
            f"{'class':<12} {'AP@0.5':>8} {'TP':>5} {'FP':>5} {'FN':>5}",
        ]
        for cls in sorted(self.counts, key=int):
            ap = self.per_class_ap.get(cls)
            ap_text = f"{ap:8.4f}" if ap is not None else "  absent"
            cc = self.counts[cls]
            lines.append(f"{cls.label:<12} {ap_text} {cc.tp:>5} {cc.fp:>5} {cc.fn:>5}")
        lines.append(
            f"mAP@{self.iou_threshold:g} = {self.map50:.4f}   "
            f"PRE = {self.precision:.4f}  REC = {self.recall:.4f}  "
            f"F1 = {self.f1:.4f}  (conf >= {self.confidence_threshold:g})"
        )
        return "\n".join(lines)


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def score_detections(
    images: list[tuple[list[Annotation], list[Detection]]],
    iou_threshold: float = 0.5,
    confidence_threshold: float = 0.25,
) -> EvalReport:
    """Score in-memory (ground truths, detections) pairs, one pair per image.

    AP is threshold-free over all detections; precision/recall/F1 use only
    detections at or above the confidence threshold, with counts pooled
    over classes. Classes absent from the ground truth are excluded from
    the mAP mean and reported without an AP value.
    """
    classes_in_gt = sorted(
        {g.fault_class for gts, _ in images for g in gts}, key=int
    )
    per_class_ap: dict[FaultClass, float] = {}
    for cls in classes_in_gt:
        pairs = [
            (
                [g for g in gts if g.fault_class is cls],
                [d for d in dets if d.annotation.fault_class is cls],
            )
            for gts, dets in images
        ]
        per_class_ap[cls] = average_precision(pairs, iou_threshold)
    map50 = (
        sum(per_class_ap.values()) / len(per_class_ap) if per_class_ap else 0.0
    )

    counts: dict[FaultClass, ClassCounts] = {}
    all_classes = sorted(
        set(classes_in_gt)
        | {d.annotation.fault_class for _, dets in images for d in dets},
        key=int,
    )
    for cls in all_classes:
        tp = fp = fn = 0
        for gts, dets in images:
            result = match_detections(
                [g for g in gts if g.fault_class is cls],
                [
                    d
                    for d in dets
                    if d.annotation.fault_class is cls
                    and d.confidence >= confidence_threshold
                ],
                iou_threshold,
            )
            tp += result.tp
            fp += result.fp
            fn += result.fn
        counts[cls] = ClassCounts(tp, fp, fn)

    total_tp = sum(c.tp for c in counts.values())
    total_fp = sum(c.fp for c in counts.values())
    total_fn = sum(c.fn for c in counts.values())
    precision = _safe_div(total_tp, total_tp + total_fp)
    recall = _safe_div(total_tp, total_tp + total_fn)

    macro_p = []
    macro_r = []
    for cls in classes_in_gt:
        cc = counts[cls]
        macro_p.append(_safe_div(cc.tp, cc.tp + cc.fp))
        macro_r.append(_safe_div(cc.tp, cc.tp + cc.fn))
    macro_precision = sum(macro_p) / len(macro_p) if macro_p else 0.0
    macro_recall = sum(macro_r) / len(macro_r) if macro_r else 0.0

    return EvalReport(
        per_class_ap=per_class_ap,
        map50=map50,
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        macro_precision=macro_precision,
        macro_recall=macro_recall,
        macro_f1=_f1(macro_precision, macro_recall),
        iou_threshold=iou_threshold,
        confidence_threshold=confidence_threshold,
        counts=counts,
        num_images=len(images),
    )


def evaluate(
    dataset_dir: str | Path,
    predictions_dir: str | Path,
    split: str = "test",
    iou_threshold: float = 0.5,
    confidence_threshold: float = 0.25,
) -> EvalReport:
    """Evaluate prediction files against one split of a built dataset.

    Every image in the split must have a prediction file named
    `<image stem>.txt` under predictions_dir; an empty file is a valid
    no-detection result, a missing one is an error naming the image.
    """
    dataset_dir = Path(dataset_dir)
    predictions_dir = Path(predictions_dir)
    manifest_path = dataset_dir / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {manifest_path}: {exc}") from exc
    entries = [e for e in manifest.get("entries", []) if e.get("split") == split]
    if not entries:
        raise DataError(f"no entries for split {split!r} in {manifest_path}")
    images = []
    for entry in entries:
        label_path = dataset_dir / entry["label"]
        gts = parse_labels(label_path)
        image_name = Path(entry["image"]).name
        pred_path = predictions_dir / (Path(image_name).stem + ".txt")
        if not pred_path.exists():
            raise DataError(f"missing prediction file for image {image_name}")
        dets = parse_predictions(pred_path)
        images.append((gts, dets))
    return score_detections(images, iou_threshold, confidence_threshold)
