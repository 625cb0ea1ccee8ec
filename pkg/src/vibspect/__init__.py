"""vibspect: turn 1-D vibration signals into spectrogram detection datasets.

The pipeline runs signal -> fixed-length segments -> wavelet scalograms ->
normalized 640x640 images with YOLO-format bounding-box labels, and scores
detector predictions with mAP@0.5, precision, recall, and F1.
"""

from vibspect.errors import DataError

__version__ = "0.1.0"

__all__ = ["DataError", "__version__"]
