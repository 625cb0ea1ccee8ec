"""Detector adapter for vibspect-built datasets.

Bridges a detection model runtime to the toolkit's file interfaces: it
reads the images/labels/manifest dataset layout, emits the data
description the trainer expects, and exports predictions as
`class x_center y_center width height confidence` text files. The dataset
directory is never written to.
"""

__version__ = "0.1.0"
