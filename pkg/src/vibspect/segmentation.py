"""Slice signals into fixed-length overlapping windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vibspect.annotation import FaultClass
from vibspect.errors import DataError
from vibspect.signal_io import Signal


@dataclass(frozen=True)
class Segment:
    """One fixed-length window cut from a parent signal."""

    samples: np.ndarray
    start_index: int
    parent_rate_hz: float
    inherited_label: FaultClass | None = None

    def __len__(self) -> int:
        return len(self.samples)


def segment_signal(
    signal: Signal,
    window_len: int = 2048,
    overlap_fraction: float = 0.5,
) -> list[Segment]:
    """Cut a signal into windows of window_len samples with the given overlap.

    Windows start at multiples of hop = round(window_len * (1 - overlap));
    a trailing remainder shorter than window_len is discarded rather than
    padded, so no window carries artificial content.
    """
    if window_len <= 0:
        raise ValueError(f"window_len must be positive, got {window_len}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(
            f"overlap_fraction must be in [0,1), got {overlap_fraction}"
        )
    n = len(signal.samples)
    if n < window_len:
        raise DataError(
            f"signal of {n} samples is shorter than window_len {window_len}"
        )
    hop = int(round(window_len * (1.0 - overlap_fraction)))
    hop = max(hop, 1)
    count = (n - window_len) // hop + 1
    return [
        Segment(
            samples=signal.samples[start : start + window_len],
            start_index=start,
            parent_rate_hz=signal.sample_rate_hz,
            inherited_label=signal.source_label,
        )
        for start in (k * hop for k in range(count))
    ]
