"""Continuous wavelet transform with a real Morlet wavelet.

The transform correlates the signal with scaled copies of
psi(t) = exp(-t^2/2) * cos(5 t), a sinusoidal carrier under a Gaussian
envelope, and divides each row by sqrt(scale):

    coeff[scale a, shift b] = (1/sqrt(a)) * sum_t x[t] * psi((t - b) / a)

with t, b in sample indices and the signal treated as zero outside its
support. Two evaluation paths are provided: `cwt_direct` computes the sum
literally and serves as the correctness oracle; `cwt_fft` evaluates the
same truncated-wavelet correlation through zero-padded FFTs and must match
it to near machine precision.

Scales map to pseudo-frequencies through the carrier:
f(a) = (5 / 2pi) * sample_rate / a.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft

from vibspect.errors import DataError
from vibspect.segmentation import Segment

#: Angular carrier frequency of the wavelet (the 5 in cos(5 t)).
CARRIER_OMEGA = 5.0

# The wavelet is evaluated only on |t| <= SUPPORT_RADIUS wavelet units;
# the Gaussian envelope is below e^-18 outside, so the truncation error
# is ~1e-8 relative. Both transform paths share the truncated taps, so
# their agreement is unaffected by it.
SUPPORT_RADIUS = 6.0

#: Default frequency band of the scale grid, as fractions of the sample rate.
DEFAULT_F_MIN_FRACTION = 1.0 / 500.0
DEFAULT_F_MAX_FRACTION = 1.0 / 4.0
DEFAULT_NUM_SCALES = 64


def morlet(t):
    """Evaluate the mother wavelet exp(-t^2/2) * cos(5 t); accepts arrays."""
    t = np.asarray(t, dtype=np.float64)
    out = np.exp(-0.5 * t * t) * np.cos(CARRIER_OMEGA * t)
    return out if out.ndim else float(out)


def pseudo_frequency(scale: float, sample_rate_hz: float) -> float:
    """Frequency in Hz that a wavelet at this scale responds to most."""
    return (CARRIER_OMEGA / (2.0 * np.pi)) * sample_rate_hz / scale


def scale_for_frequency(frequency_hz: float, sample_rate_hz: float) -> float:
    """Inverse of pseudo_frequency."""
    return (CARRIER_OMEGA / (2.0 * np.pi)) * sample_rate_hz / frequency_hz


@dataclass(frozen=True)
class ScaleGrid:
    """Strictly increasing wavelet scales covering [f_min_hz, f_max_hz]."""

    scales: np.ndarray
    f_min_hz: float
    f_max_hz: float
    sample_rate_hz: float

    def __post_init__(self) -> None:
        scales = np.asarray(self.scales, dtype=np.float64)
        object.__setattr__(self, "scales", scales)
        if scales.ndim != 1 or scales.size == 0:
            raise ValueError("scales must be a non-empty 1-D sequence")
        if not np.all(scales > 0) or not np.all(np.diff(scales) > 0):
            raise ValueError("scales must be strictly increasing and positive")

    @property
    def num_scales(self) -> int:
        return len(self.scales)

    def pseudo_frequencies(self) -> np.ndarray:
        """Pseudo-frequency of every scale, in Hz (descending)."""
        return (CARRIER_OMEGA / (2.0 * np.pi)) * self.sample_rate_hz / self.scales


def make_scale_grid(
    f_min_hz: float,
    f_max_hz: float,
    num_scales: int,
    sample_rate_hz: float,
) -> ScaleGrid:
    """Build a log-spaced scale grid whose pseudo-frequencies span the band.

    Row 0 corresponds to f_max_hz (smallest scale) and the last row to
    f_min_hz, matching top-of-image = highest frequency downstream.
    """
    if num_scales < 2:
        raise ValueError(f"num_scales must be at least 2, got {num_scales}")
    if not 0.0 < f_min_hz < f_max_hz:
        raise ValueError(
            f"need 0 < f_min < f_max, got f_min={f_min_hz} f_max={f_max_hz}"
        )
    if f_max_hz > sample_rate_hz / 2:
        raise ValueError(
            f"f_max {f_max_hz} exceeds Nyquist {sample_rate_hz / 2}"
        )
    frequencies = np.geomspace(f_max_hz, f_min_hz, num_scales)
    scales = (CARRIER_OMEGA / (2.0 * np.pi)) * sample_rate_hz / frequencies
    return ScaleGrid(
        scales=scales,
        f_min_hz=f_min_hz,
        f_max_hz=f_max_hz,
        sample_rate_hz=sample_rate_hz,
    )


def default_scale_grid(sample_rate_hz: float, num_scales: int = DEFAULT_NUM_SCALES) -> ScaleGrid:
    """Grid spanning [rate/500, rate/4], wide enough for bearing fault bands."""
    return make_scale_grid(
        f_min_hz=sample_rate_hz * DEFAULT_F_MIN_FRACTION,
        f_max_hz=sample_rate_hz * DEFAULT_F_MAX_FRACTION,
        num_scales=num_scales,
        sample_rate_hz=sample_rate_hz,
    )


@dataclass(frozen=True)
class Scalogram:
    """Real transform coefficients, rows = scales, columns = time shifts."""

    coefficients: np.ndarray
    scale_grid: ScaleGrid
    sample_rate_hz: float

    def __post_init__(self) -> None:
        coeff = np.asarray(self.coefficients, dtype=np.float64)
        object.__setattr__(self, "coefficients", coeff)
        if coeff.ndim != 2:
            raise ValueError("coefficients must be a 2-D matrix")
        if coeff.shape[0] != self.scale_grid.num_scales:
            raise ValueError(
                f"row count {coeff.shape[0]} does not match "
                f"{self.scale_grid.num_scales} scales"
            )
        if not np.all(np.isfinite(coeff)):
            raise ValueError("non-finite transform coefficient")


def _wavelet_taps(scale: float) -> np.ndarray:
    """Sampled wavelet psi(k/scale) for k in [-half, half], half = ceil(6*scale)."""
    half = int(np.ceil(SUPPORT_RADIUS * scale))
    k = np.arange(-half, half + 1, dtype=np.float64)
    return morlet(k / scale)


def cwt_direct(segment: Segment, grid: ScaleGrid) -> Scalogram:
    """Evaluate the transform as a literal time-domain sum (the oracle path).

    Each output row is the dot product of the zero-extended signal with the
    truncated wavelet taps at every shift, scaled by 1/sqrt(scale). Slow but
    transparently faithful to the definition.
    """
    x = np.asarray(segment.samples, dtype=np.float64)
    n = len(x)
    rows = np.empty((grid.num_scales, n))
    for i, scale in enumerate(grid.scales):
        taps = _wavelet_taps(scale)
        half = (len(taps) - 1) // 2
        padded = np.concatenate([np.zeros(half), x, np.zeros(half)])
        windows = np.lib.stride_tricks.sliding_window_view(padded, len(taps))
        rows[i] = windows @ taps / np.sqrt(scale)
    return Scalogram(rows, grid, segment.parent_rate_hz)


def cwt_fft(segment: Segment, grid: ScaleGrid) -> Scalogram:
    """Evaluate the transform through zero-padded FFT correlation.

    The FFT length covers signal length plus the widest wavelet support, so
    the correlation is linear, never circular, and matches `cwt_direct` to
    roundoff.
    """
    x = np.asarray(segment.samples, dtype=np.float64)
    n = len(x)
    max_half = int(np.ceil(SUPPORT_RADIUS * grid.scales[-1]))
    n_fft = scipy.fft.next_fast_len(n + 2 * max_half, real=True)
    spectrum = scipy.fft.rfft(x, n_fft)
    rows = np.empty((grid.num_scales, n))
    for i, scale in enumerate(grid.scales):
        taps = _wavelet_taps(scale)
        half = (len(taps) - 1) // 2
        kernel = scipy.fft.rfft(taps[::-1], n_fft)
        full = scipy.fft.irfft(spectrum * kernel, n_fft)
        rows[i] = full[half : half + n] / np.sqrt(scale)
    return Scalogram(rows, grid, segment.parent_rate_hz)


def ridge_frequency(scalogram: Scalogram) -> float:
    """Pseudo-frequency of the row with the largest mean |coefficient|.

    Ties resolve to the lower scale index (the higher frequency).
    """
    energy = np.mean(np.abs(scalogram.coefficients), axis=1)
    row = int(np.argmax(energy))
    return pseudo_frequency(scalogram.scale_grid.scales[row], scalogram.sample_rate_hz)


_DUMP_HEADER = struct.Struct("<II")


def write_scalogram(scalogram: Scalogram, path: str | Path) -> None:
    """Dump the coefficient matrix: u32-le row/column counts, then f64-le rows."""
    coeff = scalogram.coefficients
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(coeff.shape[0], coeff.shape[1]))
        fh.write(np.ascontiguousarray(coeff, dtype="<f8").tobytes())


def read_scalogram_matrix(path: str | Path) -> np.ndarray:
    """Read back a dumped coefficient matrix (grid metadata is not stored)."""
    raw = Path(path).read_bytes()
    if len(raw) < _DUMP_HEADER.size:
        raise DataError(f"{path}: truncated scalogram dump")
    num_scales, window_len = _DUMP_HEADER.unpack_from(raw)
    expected = _DUMP_HEADER.size + 8 * num_scales * window_len
    if len(raw) != expected:
        raise DataError(
            f"{path}: expected {expected} bytes for {num_scales}x{window_len}, "
            f"got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=_DUMP_HEADER.size)
    return data.reshape(num_scales, window_len).astype(np.float64)
