"""Generate one synthetic vibration signal per bearing condition.

The generator models the classic fault phenomenology: a defect striking at
its characteristic rate (BPFO/BPFI/BSF style) excites a structural
resonance that rings down exponentially, all over Gaussian noise. The
Normal class has no impulses, just the shaft-rate sinusoid plus noise.
"""

from pathlib import Path

import numpy as np

from vibspect.annotation import FaultClass
from vibspect.segmentation import segment_signal
from vibspect.signal_io import FaultSpec, generate_fault_signal, write_signal_raw

OUT = Path(__file__).parent / "output" / "signals"
OUT.mkdir(parents=True, exist_ok=True)

RATE = 12_000.0
DURATION = 0.4  # seconds -> 4800 samples -> 3 windows of 2048 at 50% overlap

specs = {
    FaultClass.NORMAL: FaultSpec(
        fault_class=FaultClass.NORMAL, impulse_amplitude=0.0, shaft_amplitude=0.4
    ),
    FaultClass.BALL: FaultSpec(
        fault_class=FaultClass.BALL, fault_hz=118.9, resonance_hz=2800.0
    ),
    FaultClass.INNER_RACE: FaultSpec(
        fault_class=FaultClass.INNER_RACE, fault_hz=162.2, resonance_hz=1400.0
    ),
    FaultClass.OUTER_RACE: FaultSpec(
        fault_class=FaultClass.OUTER_RACE, fault_hz=107.4, resonance_hz=700.0
    ),
}

for cls, spec in specs.items():
    signal = generate_fault_signal(spec, DURATION, RATE, seed=int(cls))
    path = OUT / f"{cls.label}.f32"
    write_signal_raw(signal, path)
    segments = segment_signal(signal)
    rms = float(np.sqrt(np.mean(signal.samples**2)))
    print(
        f"{cls.label:<10} {len(signal)} samples, rms {rms:.3f}, "
        f"{len(segments)} windows -> {path}"
    )

print(f"\nsignals written to {OUT}")
