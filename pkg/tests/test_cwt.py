import numpy as np
import pytest

from conftest import make_segment
from vibspect.cwt import (
    CARRIER_OMEGA,
    Scalogram,
    cwt_direct,
    cwt_fft,
    default_scale_grid,
    make_scale_grid,
    morlet,
    pseudo_frequency,
    read_scalogram_matrix,
    ridge_frequency,
    scale_for_frequency,
    write_scalogram,
)

# Frozen via 30-digit evaluation: exp(-1/2) * cos(5).
MORLET_AT_ONE = 0.172049812484538


def test_morlet_at_zero():
    assert morlet(0.0) == 1.0


def test_morlet_at_one_matches_high_precision():
    assert morlet(1.0) == pytest.approx(MORLET_AT_ONE, rel=1e-12)


def test_morlet_even(rng):
    t = rng.uniform(-8, 8, 100)
    assert np.array_equal(morlet(t), morlet(-t))


def test_scale_grid_two_point_example():
    grid = make_scale_grid(50.0, 100.0, 2, 1000.0)
    # Frozen by inverting f(a) = (5/2pi) * fs / a at both endpoints.
    assert grid.scales == pytest.approx([7.957747154594767, 15.915494309189533])


def test_scale_grid_round_trip():
    grid = make_scale_grid(24.0, 3000.0, 64, 12000.0)
    freqs = grid.pseudo_frequencies()
    assert freqs[0] == pytest.approx(3000.0, rel=1e-9)
    assert freqs[-1] == pytest.approx(24.0, rel=1e-9)
    assert np.all(np.diff(grid.scales) > 0)


def test_scale_grid_validation():
    with pytest.raises(ValueError):
        make_scale_grid(24.0, 3000.0, 1, 12000.0)
    with pytest.raises(ValueError):
        make_scale_grid(3000.0, 24.0, 8, 12000.0)
    with pytest.raises(ValueError):
        make_scale_grid(24.0, 7000.0, 8, 12000.0)  # beyond Nyquist


def test_direct_zero_segment():
    grid = make_scale_grid(10.0, 100.0, 8, 1000.0)
    out = cwt_direct(make_segment(np.zeros(128)), grid)
    assert np.all(out.coefficients == 0.0)


def test_direct_unit_impulse_is_scaled_wavelet():
    grid = make_scale_grid(10.0, 100.0, 6, 1000.0)
    n, k = 128, 40
    x = np.zeros(n)
    x[k] = 1.0
    out = cwt_direct(make_segment(x), grid).coefficients
    b = np.arange(n)
    for row, scale in zip(out, grid.scales):
        expected = morlet((k - b) / scale) / np.sqrt(scale)
        # The taps are truncated outside |t| <= 6 wavelet units.
        expected[np.abs(k - b) > np.ceil(6 * scale)] = 0.0
        assert np.allclose(row, expected, atol=1e-12)


@pytest.mark.parametrize("n", [64, 256])
@pytest.mark.parametrize("num_scales", [4, 16])
def test_linearity_both_paths(rng, n, num_scales):
    grid = make_scale_grid(5.0, 200.0, num_scales, 1000.0)
    x = rng.normal(size=n)
    y = rng.normal(size=n)
    alpha, beta = rng.normal(), rng.normal()
    for transform in (cwt_direct, cwt_fft):
        combined = transform(make_segment(alpha * x + beta * y), grid).coefficients
        parts = (
            alpha * transform(make_segment(x), grid).coefficients
            + beta * transform(make_segment(y), grid).coefficients
        )
        scale = np.abs(combined).max()
        assert np.allclose(combined, parts, atol=1e-12 * max(scale, 1.0))


def test_scaling_both_paths(rng):
    grid = make_scale_grid(5.0, 200.0, 8, 1000.0)
    x = rng.normal(size=256)
    for transform in (cwt_direct, cwt_fft):
        base = transform(make_segment(x), grid).coefficients
        scaled = transform(make_segment(3.0 * x), grid).coefficients
        assert np.allclose(scaled, 3.0 * base, rtol=1e-12)


@pytest.mark.parametrize("n", [64, 256, 2048])
@pytest.mark.parametrize("num_scales", [4, 16, 64])
def test_fft_matches_direct(rng, n, num_scales):
    rate = 1000.0
    grid = make_scale_grid(rate / 500.0, rate / 4.0, num_scales, rate)
    x = rng.normal(size=n)
    segment = make_segment(x, rate)
    direct = cwt_direct(segment, grid).coefficients
    fast = cwt_fft(segment, grid).coefficients
    rel = np.linalg.norm(fast - direct) / np.linalg.norm(direct)
    assert rel <= 1e-8


def test_fft_zero_segment():
    grid = default_scale_grid(1000.0, num_scales=8)
    out = cwt_fft(make_segment(np.zeros(256)), grid)
    assert np.all(out.coefficients == 0.0)


def test_time_shift_covariance(rng):
    rate = 1000.0
    n, shift = 1024, 100
    grid = make_scale_grid(50.0, 250.0, 8, rate)
    burst = rng.normal(size=40)
    x = np.zeros(n)
    x[300:340] = burst
    y = np.zeros(n)
    y[300 + shift : 340 + shift] = burst
    cx = cwt_fft(make_segment(x, rate), grid).coefficients
    cy = cwt_fft(make_segment(y, rate), grid).coefficients
    assert np.allclose(cy[:, shift:], cx[:, :-shift], atol=1e-8)


def test_sinusoid_ridge_sweep():
    rate = 12000.0
    t = np.arange(2048) / rate
    grid = make_scale_grid(80.0, 2000.0, 192, rate)
    for f0 in np.geomspace(rate / 100, rate / 8, 8):
        x = np.sin(2 * np.pi * f0 * t)
        ridge = ridge_frequency(cwt_fft(make_segment(x, rate), grid))
        assert abs(ridge - f0) / f0 < 0.05


def test_ridge_single_row():
    from conftest import make_scalogram

    scalogram = make_scalogram(np.ones((1, 50)))
    expected = pseudo_frequency(scalogram.scale_grid.scales[0], 1000.0)
    assert ridge_frequency(scalogram) == expected


def test_ridge_tie_breaks_low_scale_index():
    grid = make_scale_grid(10.0, 100.0, 2, 1000.0)
    matrix = np.ones((2, 50))
    scalogram = Scalogram(matrix, grid, 1000.0)
    # Equal rows: the lower scale index (higher frequency) wins.
    assert ridge_frequency(scalogram) == pytest.approx(100.0, rel=1e-9)


def test_pseudo_frequency_inverts_scale():
    rate = 48000.0
    for f in (10.0, 440.0, 9999.0):
        assert pseudo_frequency(scale_for_frequency(f, rate), rate) == pytest.approx(
            f, rel=1e-12
        )
    assert CARRIER_OMEGA == 5.0


def test_all_outputs_finite(rng):
    grid = default_scale_grid(1000.0, num_scales=16)
    x = rng.normal(size=512) * 1e6
    for transform in (cwt_direct, cwt_fft):
        out = transform(make_segment(x), grid)
        assert np.all(np.isfinite(out.coefficients))


def test_scalogram_dump_round_trip(tmp_path, rng):
    grid = make_scale_grid(5.0, 200.0, 8, 1000.0)
    scalogram = cwt_fft(make_segment(rng.normal(size=128)), grid)
    path = tmp_path / "seg.scalogram"
    write_scalogram(scalogram, path)
    matrix = read_scalogram_matrix(path)
    assert np.array_equal(matrix, scalogram.coefficients)
    # Header sanity: u32 dims then row-major f64.
    import struct

    num_scales, window_len = struct.unpack("<II", path.read_bytes()[:8])
    assert (num_scales, window_len) == scalogram.coefficients.shape
