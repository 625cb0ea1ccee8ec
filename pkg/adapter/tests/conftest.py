import json

import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def tiny_dataset(tmp_path):
    """Handcrafted toolkit-layout dataset: 64x64 images, one box each."""
    root = tmp_path / "dataset"
    rng = np.random.default_rng(0)
    entries = []
    per_split = {"train": 6, "val": 1, "test": 2}
    index = 0
    for split, count in per_split.items():
        (root / "images" / split).mkdir(parents=True)
        (root / "labels" / split).mkdir(parents=True)
        for _ in range(count):
            name = f"img{index:03d}"
            index += 1
            pixels = (rng.uniform(0, 60, size=(64, 64))).astype(np.uint8)
            cls = index % 4
            row0, col0 = 8 + 4 * cls, 10 + 3 * cls
            pixels[row0 : row0 + 20, col0 : col0 + 24] = 220
            Image.fromarray(pixels, mode="L").save(
                root / "images" / split / f"{name}.png"
            )
            x = (col0 + 12) / 64
            y = (row0 + 10) / 64
            (root / "labels" / split / f"{name}.txt").write_text(
                f"{cls} {x:.6f} {y:.6f} {24 / 64:.6f} {20 / 64:.6f}\n"
            )
            entries.append(
                {
                    "image": f"images/{split}/{name}.png",
                    "label": f"labels/{split}/{name}.txt",
                    "split": split,
                    "fault_class": ["Normal", "Ball", "InnerRace", "OuterRace"][cls],
                    "augmentations": [],
                }
            )
    manifest = {
        "entries": entries,
        "class_names": ["Normal", "Ball", "InnerRace", "OuterRace"],
        "seed": 0,
        "counts": per_split,
        "original_counts": per_split,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return root
