"""Compare evaluation results against published benchmark reference scores.

The built-in table holds mAP@0.5, precision, recall, and F1 reported for
YOLOv9/v10/v11 and an MCNN-LSTM baseline on the CWRU, PU, and IMS bearing
datasets. Deltas are informational: those scores come from full GPU
training on the real datasets and are not reproducible at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from vibspect.metrics import EvalReport

DATASETS = ("CWRU", "PU", "IMS")
MODELS = ("YOLOv9", "YOLOv10", "YOLOv11", "MCNN-LSTM")


@dataclass(frozen=True)
class ReferenceRow:
    map50: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ReferenceTable:
    rows: dict[tuple[str, str], ReferenceRow]
    provenance: str

    def get(self, dataset: str, model: str) -> ReferenceRow:
        key = (dataset, model)
        if key not in self.rows:
            valid = ", ".join(f"({d}, {m})" for d in DATASETS for m in MODELS)
            raise KeyError(
                f"unknown reference key ({dataset}, {model}); valid keys: {valid}"
            )
        return self.rows[key]


_REFERENCE_ROWS = {
    ("CWRU", "YOLOv9"): ReferenceRow(0.994, 0.986, 0.985, 0.986),
    ("CWRU", "YOLOv10"): ReferenceRow(0.994, 0.992, 0.981, 0.986),
    ("CWRU", "YOLOv11"): ReferenceRow(0.990, 0.939, 0.985, 0.962),
    ("CWRU", "MCNN-LSTM"): ReferenceRow(0.960, 0.961, 0.961, 0.961),
    ("PU", "YOLOv9"): ReferenceRow(0.916, 0.808, 0.848, 0.827),
    ("PU", "YOLOv10"): ReferenceRow(0.972, 0.890, 0.927, 0.908),
    ("PU", "YOLOv11"): ReferenceRow(0.978, 0.949, 0.938, 0.943),
    ("PU", "MCNN-LSTM"): ReferenceRow(0.777, 0.777, 0.774, 0.776),
    ("IMS", "YOLOv9"): ReferenceRow(0.995, 0.999, 1.000, 1.000),
    ("IMS", "YOLOv10"): ReferenceRow(0.995, 0.999, 1.000, 0.999),
    ("IMS", "YOLOv11"): ReferenceRow(0.995, 1.000, 1.000, 1.000),
    ("IMS", "MCNN-LSTM"): ReferenceRow(0.968, 0.968, 0.968, 0.968),
}


def load_reference_table() -> ReferenceTable:
    """Return the published per-dataset, per-model benchmark scores."""
    return ReferenceTable(
        rows=dict(_REFERENCE_ROWS),
        provenance="published CWT-YOLO bearing fault benchmark results",
    )


@dataclass(frozen=True)
class ComparisonSummary:
    dataset: str
    model: str
    user: dict[str, float]
    reference: dict[str, float]
    deltas: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "user": dict(self.user),
            "reference": dict(self.reference),
            "deltas": dict(self.deltas),
        }

    def format_table(self) -> str:
        lines = [
            f"comparison vs ({self.dataset}, {self.model})",
            f"{'metric':<10} {'user':>8} {'reference':>10} {'delta':>8}",
        ]
        for metric in ("map50", "precision", "recall", "f1"):
            lines.append(
                f"{metric:<10} {self.user[metric]:>8.4f} "
                f"{self.reference[metric]:>10.4f} {self.deltas[metric]:>+8.4f}"
            )
        return "\n".join(lines)


def compare(report: EvalReport, dataset: str, model: str) -> ComparisonSummary:
    """Per-metric deltas (user minus reference); informational, no pass/fail."""
    row = load_reference_table().get(dataset, model)
    user = {
        "map50": report.map50,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
    }
    reference = {
        "map50": row.map50,
        "precision": row.precision,
        "recall": row.recall,
        "f1": row.f1,
    }
    deltas = {k: user[k] - reference[k] for k in user}
    return ComparisonSummary(
        dataset=dataset, model=model, user=user, reference=reference, deltas=deltas
    )
