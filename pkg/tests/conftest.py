import numpy as np
import pytest

from vibspect.annotation import Annotation, Detection, FaultClass
from vibspect.cwt import ScaleGrid, Scalogram, make_scale_grid
from vibspect.segmentation import Segment


def make_segment(samples, rate=1000.0, label=None):
    return Segment(
        samples=np.asarray(samples, dtype=np.float64),
        start_index=0,
        parent_rate_hz=rate,
        inherited_label=label,
    )


def make_scalogram(matrix, rate=1000.0):
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if n >= 2:
        grid = make_scale_grid(rate / 100.0, rate / 4.0, n, rate)
    else:
        grid = ScaleGrid(
            scales=np.array([10.0]),
            f_min_hz=rate / (4 * np.pi),
            f_max_hz=rate / (4 * np.pi),
            sample_rate_hz=rate,
        )
    return Scalogram(matrix, grid, rate)


def annotation_from_tuple(box):
    cid, x, y, w, h = box
    return Annotation(FaultClass(cid), x, y, w, h)


def detection_from_tuple(det):
    cid, x, y, w, h, conf = det
    return Detection(annotation_from_tuple((cid, x, y, w, h)), conf)


def images_from_tuples(images):
    return [
        (
            [annotation_from_tuple(g) for g in gts],
            [detection_from_tuple(d) for d in dets],
        )
        for gts, dets in images
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
