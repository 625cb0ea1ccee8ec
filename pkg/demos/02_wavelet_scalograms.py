"""Transform a fault signal into a scalogram and render it as a PNG.

Demonstrates the two evaluation paths of the wavelet transform (the fast
FFT path and the literal-sum oracle), the scale/pseudo-frequency mapping,
and ridge extraction on a pure tone.
"""

from pathlib import Path

import numpy as np

from vibspect.cwt import (
    cwt_direct,
    cwt_fft,
    default_scale_grid,
    make_scale_grid,
    ridge_frequency,
)
from vibspect.render import make_spectrogram_image, render_png
from vibspect.segmentation import segment_signal
from vibspect.signal_io import FaultSpec, generate_fault_signal
from vibspect.annotation import FaultClass

OUT = Path(__file__).parent / "output" / "scalograms"
OUT.mkdir(parents=True, exist_ok=True)

RATE = 12_000.0

# A ball-fault signal: impulse train ringing at 2.8 kHz.
signal = generate_fault_signal(
    FaultSpec(fault_class=FaultClass.BALL, fault_hz=118.9, resonance_hz=2800.0),
    0.4,
    RATE,
    seed=1,
)
segment = segment_signal(signal)[0]
grid = default_scale_grid(RATE)
print(f"grid: {grid.num_scales} scales, {grid.f_min_hz:.0f}..{grid.f_max_hz:.0f} Hz")

fast = cwt_fft(segment, grid)
slow = cwt_direct(segment, grid)
rel = np.linalg.norm(fast.coefficients - slow.coefficients) / np.linalg.norm(
    slow.coefficients
)
print(f"fft path vs direct sum: relative Frobenius error {rel:.2e}")

for colormap in ("grayscale", "viridis"):
    image = make_spectrogram_image(fast, colormap=colormap, provenance="ball demo")
    path = OUT / f"ball_{colormap}.png"
    render_png(image, path)
    print(f"wrote {path} ({image.height}x{image.width})")

# Ridge extraction: a pure 440 Hz tone should peak at its own frequency.
from vibspect.signal_io import Signal

t = np.arange(2048) / RATE
tone = Signal(np.sin(2 * np.pi * 440.0 * t), RATE)
tone_segment = segment_signal(tone, window_len=2048)[0]
fine_grid = make_scale_grid(80.0, 2000.0, 256, RATE)
ridge = ridge_frequency(cwt_fft(tone_segment, fine_grid))
print(f"ridge of a 440 Hz tone: {ridge:.1f} Hz")
