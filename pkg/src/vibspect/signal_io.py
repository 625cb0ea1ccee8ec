"""Load vibration recordings and generate synthetic bearing-fault signals.

Real recordings come in as csv (one float per line), wav (first channel), or
headerless little-endian float32. The synthetic generator produces the
classic fault phenomenology: an impulse train at the characteristic fault
frequency, each impulse ringing down at a resonance, over Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io.wavfile

from vibspect.annotation import FaultClass
from vibspect.errors import DataError


@dataclass(frozen=True)
class Signal:
    """A sampled 1-D waveform with its sample rate and optional class tag."""

    samples: np.ndarray
    sample_rate_hz: float
    source_label: FaultClass | None = None

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise DataError("empty signal")
        if self.sample_rate_hz <= 0:
            raise DataError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(samples)):
            raise DataError("non-finite sample in signal")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class FaultSpec:
    """Parameters of one synthetic bearing condition.

    fault_hz is the impulse repetition rate (BPFO/BPFI/BSF-style),
    resonance_hz the ring-down carrier excited by each impact, and
    decay_rate its exponential damping in 1/s. The Normal class carries no
    impulses, only the shaft-rate sinusoid plus noise.
    """

    fault_class: FaultClass
    shaft_hz: float = 29.95
    fault_hz: float = 120.0
    resonance_hz: float = 3000.0
    decay_rate: float = 900.0
    impulse_amplitude: float = 1.0
    noise_std: float = 0.05
    shaft_amplitude: float = 0.1

    def __post_init__(self) -> None:
        for name in ("shaft_hz", "fault_hz", "resonance_hz", "decay_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("impulse_amplitude", "noise_std", "shaft_amplitude"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.fault_class is FaultClass.NORMAL and self.impulse_amplitude != 0:
            raise ValueError("Normal class requires impulse_amplitude = 0")


def load_signal(path: str | Path, format: str, sample_rate_hz: float) -> Signal:
    """Read a signal file in one of the supported formats.

    For wav input the embedded sample rate overrides the argument.
    Multi-channel inputs are reduced to channel 0.
    """
    path = Path(path)
    if format == "csv":
        samples = _read_csv(path)
        rate = sample_rate_hz
    elif format == "wav":
        samples, rate = _read_wav(path)
    elif format == "raw_f32le":
        samples = _read_raw_f32le(path)
        rate = sample_rate_hz
    else:
        raise ValueError(f"unknown signal format {format!r}")
    return Signal(samples=samples, sample_rate_hz=rate)


def _read_csv(path: Path) -> np.ndarray:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    values = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            # One non-numeric header line is tolerated at the top.
            if lineno == 1 and not values:
                continue
            raise DataError(
                f"{path}: malformed numeric field at line {lineno}: {line!r}"
            ) from None
    if not values:
        raise DataError(f"{path}: empty signal")
    return np.asarray(values, dtype=np.float64)


def _read_wav(path: Path) -> tuple[np.ndarray, float]:
    try:
        rate, data = scipy.io.wavfile.read(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"{path}: not a readable wav file: {exc}") from exc
    if data.ndim > 1:
        data = data[:, 0]
    if data.size == 0:
        raise DataError(f"{path}: empty signal")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise DataError(f"{path}: unsupported wav sample type {data.dtype}")
    return samples, float(rate)


def _read_raw_f32le(path: Path) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(raw) == 0:
        raise DataError(f"{path}: empty signal")
    if len(raw) % 4 != 0:
        raise DataError(
            f"{path}: length {len(raw)} is not a multiple of 4 bytes"
        )
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def write_signal_raw(signal: Signal, path: str | Path) -> None:
    """Write samples as headerless little-endian float32.

    Samples already representable in float32 (anything loaded from
    raw_f32le) round-trip bit-exactly; float64 values are rounded once.
    """
    Path(path).write_bytes(signal.samples.astype("<f4").tobytes())


def generate_fault_signal(
    spec: FaultSpec,
    duration_s: float,
    sample_rate_hz: float,
    seed: int,
) -> Signal:
    """Generate a deterministic synthetic vibration signal for one condition.

    Fault classes produce Gaussian noise plus an impulse train at fault_hz,
    each impulse an exponentially decaying sinusoid at resonance_hz. Normal
    produces noise plus a low-amplitude shaft-rate sinusoid. Identical
    (spec, duration, rate, seed) always yields identical samples.
    """
    if duration_s <= 0 or sample_rate_hz <= 0:
        raise ValueError("duration and sample rate must be positive")
    n = int(round(duration_s * sample_rate_hz))
    if n < 2048:
        raise ValueError(
            f"duration x rate = {n} samples; need at least one 2048-sample window"
        )
    if spec.fault_class is not FaultClass.NORMAL and spec.fault_hz >= sample_rate_hz / 2:
        raise ValueError(
            f"fault_hz {spec.fault_hz} must be below half the sample rate"
        )
    rng = np.random.default_rng(seed)
    t = np.arange(n) / sample_rate_hz
    samples = rng.normal(0.0, 1.0, n) * spec.noise_std

    if spec.fault_class is FaultClass.NORMAL:
        samples += spec.shaft_amplitude * np.sin(2 * np.pi * spec.shaft_hz * t)
    else:
        n_impulses = int(np.floor(duration_s * spec.fault_hz))
        for k in range(n_impulses):
            t0 = k / spec.fault_hz
            start = int(np.ceil(t0 * sample_rate_hz))
            if start >= n:
                break
            dt = t[start:] - t0
            samples[start:] += (
                spec.impulse_amplitude
                * np.exp(-spec.decay_rate * dt)
                * np.sin(2 * np.pi * spec.resonance_hz * dt)
            )
    return Signal(
        samples=samples,
        sample_rate_hz=sample_rate_hz,
        source_label=spec.fault_class,
    )
