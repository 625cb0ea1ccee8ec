"""Turn scalograms into normalized, resized, detection-ready images.

Coefficient magnitudes are log-compressed, min-max normalized to [0,1],
bilinearly resized to the detector input size (640x640 by default), and
written as 8-bit PNG, either single-channel grayscale or RGB through a
fixed 256-entry viridis-like lookup table. Row 0 is the highest frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

DEFAULT_IMAGE_SIZE = 640

COLORMAPS = ("grayscale", "viridis")

# Anchor colors interpolated to the 256-entry RGB table.
_VIRIDIS_ANCHORS = np.array(
    [
        (68, 1, 84),
        (71, 44, 122),
        (59, 81, 139),
        (44, 113, 142),
        (33, 144, 141),
        (39, 173, 129),
        (92, 200, 99),
        (170, 220, 50),
        (253, 231, 37),
    ],
    dtype=np.float64,
)


def _build_viridis_lut() -> np.ndarray:
    positions = np.linspace(0.0, 1.0, len(_VIRIDIS_ANCHORS))
    grid = np.linspace(0.0, 1.0, 256)
    channels = [np.interp(grid, positions, _VIRIDIS_ANCHORS[:, c]) for c in range(3)]
    return np.rint(np.stack(channels, axis=1)).astype(np.uint8)


VIRIDIS_LUT = _build_viridis_lut()


@dataclass(frozen=True)
class SpectrogramImage:
    """Pixel raster in [0,1] plus colormap choice and provenance note."""

    pixels: np.ndarray
    colormap: str = "grayscale"
    provenance: str = ""

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels, dtype=np.float64)
        object.__setattr__(self, "pixels", pixels)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D matrix")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("pixel values must lie in [0,1]")
        if self.colormap not in COLORMAPS:
            raise ValueError(f"unknown colormap {self.colormap!r}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def log_normalize(scalogram, epsilon: float = 1e-10) -> np.ndarray:
    """Log-compress |coefficients| and min-max normalize to [0,1].

    A constant input maps to all zeros. The result is invariant under
    positive scaling of the input because min-max subtraction cancels the
    additive log of the factor.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    coeff = np.asarray(getattr(scalogram, "coefficients", scalogram), dtype=np.float64)
    m = np.log(np.abs(coeff) + epsilon)
    lo, hi = m.min(), m.max()
    if hi == lo:
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def _axis_positions(n_in: int, n_out: int) -> np.ndarray:
    # Corner-aligned sampling: first/last output pixels hit first/last inputs.
    if n_out == 1:
        return np.zeros(1)
    return np.arange(n_out) * ((n_in - 1) / (n_out - 1))


def resize(
    matrix: np.ndarray,
    out_h: int = DEFAULT_IMAGE_SIZE,
    out_w: int = DEFAULT_IMAGE_SIZE,
) -> np.ndarray:
    """Bilinear corner-aligned resize; identity when dimensions already match."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("resize expects a non-empty 2-D matrix")
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"output dims must be positive, got {out_h}x{out_w}")
    in_h, in_w = matrix.shape
    if (in_h, in_w) == (out_h, out_w):
        return matrix.copy()
    rows = _axis_positions(in_h, out_h)
    cols = _axis_positions(in_w, out_w)
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    top = (1.0 - fc) * matrix[np.ix_(r0, c0)] + fc * matrix[np.ix_(r0, c1)]
    bottom = (1.0 - fc) * matrix[np.ix_(r1, c0)] + fc * matrix[np.ix_(r1, c1)]
    out = (1.0 - fr) * top + fr * bottom
    return np.clip(out, matrix.min(), matrix.max())


def bilinear_sample(
    matrix: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    fill: float = 0.0,
) -> np.ndarray:
    """Sample a matrix at fractional (row, col) points; outside points get fill."""
    matrix = np.asarray(matrix, dtype=np.float64)
    in_h, in_w = matrix.shape
    rows = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.float64)
    inside = (rows >= 0) & (rows <= in_h - 1) & (cols >= 0) & (cols <= in_w - 1)
    r = np.clip(rows, 0, in_h - 1)
    c = np.clip(cols, 0, in_w - 1)
    r0 = np.floor(r).astype(int)
    c0 = np.floor(c).astype(int)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    fr = r - r0
    fc = c - c0
    value = (1.0 - fr) * (
        (1.0 - fc) * matrix[r0, c0] + fc * matrix[r0, c1]
    ) + fr * ((1.0 - fc) * matrix[r1, c0] + fc * matrix[r1, c1])
    return np.where(inside, value, fill)


def make_spectrogram_image(
    scalogram,
    out_h: int = DEFAULT_IMAGE_SIZE,
    out_w: int = DEFAULT_IMAGE_SIZE,
    colormap: str = "grayscale",
    provenance: str = "",
    epsilon: float = 1e-10,
) -> SpectrogramImage:
    """Full scalogram -> image conversion: log-normalize, resize, wrap."""
    pixels = resize(log_normalize(scalogram, epsilon), out_h, out_w)
    return SpectrogramImage(pixels=pixels, colormap=colormap, provenance=provenance)


def render_png(image: SpectrogramImage, path: str | Path) -> None:
    """Write an 8-bit PNG; pixel p maps to gray (or LUT index) round(p * 255)."""
    levels = np.rint(image.pixels * 255.0).astype(np.uint8)
    if image.colormap == "grayscale":
        pil = Image.fromarray(levels, mode="L")
    else:
        pil = Image.fromarray(VIRIDIS_LUT[levels], mode="RGB")
    try:
        pil.save(Path(path), format="PNG")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
