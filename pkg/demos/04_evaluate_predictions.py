"""Score detector predictions against a dataset split.

Uses the dataset from demo 03 (building it if needed), fabricates
predictions from the ground truth (once exact, once with noisy boxes and a
dropped detection), evaluates both, and compares the result against the
published benchmark table.
"""

import json
from pathlib import Path

import numpy as np

from vibspect.annotation import Detection, parse_labels, write_predictions
from vibspect.metrics import evaluate
from vibspect.report import compare

DATASET = Path(__file__).parent / "output" / "dataset"
if not (DATASET / "manifest.json").exists():
    import runpy

    runpy.run_path(str(Path(__file__).parent / "03_build_detection_dataset.py"))

manifest = json.loads((DATASET / "manifest.json").read_text())
rng = np.random.default_rng(11)

for variant, noisy in (("exact", False), ("noisy", True)):
    preds_dir = Path(__file__).parent / "output" / f"preds_{variant}"
    preds_dir.mkdir(parents=True, exist_ok=True)
    for entry in manifest["entries"]:
        if entry["split"] != "test":
            continue
        detections = []
        for box in parse_labels(DATASET / entry["label"]):
            if noisy and rng.random() < 0.2:
                continue  # pretend the detector missed it
            confidence = float(rng.uniform(0.6, 0.95)) if noisy else 1.0
            detections.append(Detection(box, confidence))
        name = entry["image"].rsplit("/", 1)[-1].replace(".png", ".txt")
        write_predictions(detections, preds_dir / name)

    report = evaluate(DATASET, preds_dir, split="test")
    print(f"\n=== {variant} predictions ===")
    print(report.format_table())

summary = compare(report, "CWRU", "YOLOv11")
print()
print(summary.format_table())
