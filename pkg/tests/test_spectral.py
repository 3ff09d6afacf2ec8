import numpy as np
import pytest

from trimask import (NRT_PRESET, RT_PRESET, StftConfig, extract_features, istft,
                     restore_low_bins, stft, trim_low_bins)
from trimask.spectral import EPS_MAG, _analysis_window


def _direct_dft_frame(x, win, fft_size):
    """O(N^2) DFT oracle for one windowed frame."""
    xw = x * win
    n = np.arange(fft_size)
    bins = np.zeros(fft_size // 2 + 1, dtype=complex)
    for k in range(fft_size // 2 + 1):
        bins[k] = np.sum(xw * np.exp(-2j * np.pi * k * n[: len(xw)] / fft_size))
    return bins


def test_stft_zero_signal_shapes():
    spec = stft(np.zeros(1024), RT_PRESET)
    assert spec.bins.shape == (5, 257)
    assert np.all(spec.bins == 0)


def test_stft_too_short_errors():
    with pytest.raises(ValueError, match="insufficient samples"):
        stft(np.zeros(511), RT_PRESET)


def test_stft_cosine_at_bin_center_against_direct_dft():
    cfg = RT_PRESET
    fs = 16000
    freq = 32 * fs / cfg.fft_size  # exactly bin 32
    n = np.arange(4096)
    x = np.cos(2 * np.pi * freq / fs * n)
    spec = stft(x, cfg)
    mag = np.abs(spec.bins)
    for t in range(spec.frame_count):
        peak = mag[t, 32]
        assert peak == mag[t].max()
        outside = np.concatenate([mag[t, :30], mag[t, 35:]])
        assert 20 * np.log10(peak / outside.max()) >= 40.0

    win = _analysis_window(cfg)
    oracle = _direct_dft_frame(x[: cfg.window_size], win, cfg.fft_size)
    assert np.max(np.abs(spec.bins[0] - oracle)) < 1e-8 * np.max(np.abs(oracle))


@pytest.mark.parametrize("cfg", [RT_PRESET, NRT_PRESET])
def test_stft_parseval(cfg):
    rng = np.random.default_rng(11)
    x = rng.standard_normal(cfg.window_size * 3)
    win = _analysis_window(cfg)
    spec = stft(x, cfg)
    for t in range(spec.frame_count):
        xw = x[t * cfg.hop_size : t * cfg.hop_size + cfg.window_size] * win
        time_energy = cfg.fft_size * np.sum(xw**2)
        b = spec.bins[t]
        freq_energy = (np.abs(b[0]) ** 2 + np.abs(b[-1]) ** 2
                       + 2 * np.sum(np.abs(b[1:-1]) ** 2))
        assert abs(time_energy - freq_energy) <= 1e-6 * time_energy


@pytest.mark.parametrize("cfg", [RT_PRESET, NRT_PRESET])
def test_istft_round_trip_interior(cfg):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(16000)
    y = istft(stft(x, cfg), cfg, length=len(x)).samples
    w = cfg.window_size
    err = y[w:-w] - x[w:-w]
    snr = 10 * np.log10(np.sum(x[w:-w] ** 2) / np.sum(err**2 + 1e-300))
    assert snr >= 120.0
    assert np.linalg.norm(err) <= 1e-6 * np.linalg.norm(x[w:-w])


def test_istft_zero_spectrogram():
    spec = stft(np.zeros(2048), RT_PRESET)
    assert np.all(istft(spec, RT_PRESET).samples == 0)


def test_istft_shape_mismatch_errors():
    spec = trim_low_bins(stft(np.zeros(2048), RT_PRESET), 4)
    with pytest.raises(ValueError, match="shape mismatch"):
        istft(spec, RT_PRESET)


def test_istft_single_frame_impulse_against_inverse_dft():
    # one stft frame of an interior impulse: istft recovers the impulse on
    # the window's support, and irfft of the frame is the windowed impulse
    cfg = RT_PRESET
    x = np.zeros(cfg.window_size)
    x[200] = 1.0
    spec = stft(x, cfg)
    assert spec.frame_count == 1
    win = _analysis_window(cfg)
    frame = np.fft.irfft(spec.bins[0], n=cfg.fft_size)[: cfg.window_size]
    assert np.allclose(frame, win * x, atol=1e-12)
    y = istft(spec, cfg).samples
    support = win > 1e-6
    assert np.allclose(y[support], x[support], atol=1e-10)


def test_trim_low_bins():
    spec = stft(np.random.default_rng(0).standard_normal(2048), RT_PRESET)
    trimmed = trim_low_bins(spec, 4)
    assert trimmed.bin_count == 253
    assert trimmed.bin_offset == 4
    assert np.array_equal(trimmed.bins, spec.bins[:, 4:])
    same = trim_low_bins(spec, 0)
    assert np.array_equal(same.bins, spec.bins)
    with pytest.raises(ValueError):
        trim_low_bins(spec, 257)


def test_restore_low_bins_round_trip():
    spec = stft(np.random.default_rng(1).standard_normal(2048), RT_PRESET)
    back = restore_low_bins(trim_low_bins(spec, 4), 4)
    assert back.bin_count == 257
    assert np.all(back.bins[:, :4] == 0)
    assert np.array_equal(back.bins[:, 4:], spec.bins[:, 4:])
    assert np.array_equal(restore_low_bins(spec, 0).bins, spec.bins)


def test_trim_restore_is_projection():
    spec = stft(np.random.default_rng(2).standard_normal(2048), RT_PRESET)
    once = restore_low_bins(trim_low_bins(spec, 4), 4)
    twice = restore_low_bins(trim_low_bins(once, 4), 4)
    assert np.array_equal(once.bins, twice.bins)


def test_stft_linearity():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(4096)
    y = rng.standard_normal(4096)
    a, b = 0.7, -1.3
    lhs = stft(a * x + b * y, RT_PRESET).bins
    rhs = a * stft(x, RT_PRESET).bins + b * stft(y, RT_PRESET).bins
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))


def test_features_unit_magnitude_log_channel():
    from trimask.types import ComplexSpectrogram

    spec = ComplexSpectrogram(bins=np.ones((4, 253), dtype=complex), bin_offset=4)
    feats = extract_features(spec, RT_PRESET)
    assert np.allclose(feats.channels[0], np.log(1 + EPS_MAG))


@pytest.mark.parametrize("bin_idx", [32, 33, 37])
def test_features_demodulation_constant_for_tone(bin_idx):
    # demodulation removes the hop-induced per-frame phase advance
    # 2*pi*f*hop/fft of a tone at a bin center
    cfg = RT_PRESET
    fs = 16000
    n = np.arange(8192)
    x = np.cos(2 * np.pi * (bin_idx * fs / cfg.fft_size) / fs * n + 0.41)
    spec = trim_low_bins(stft(x, cfg), 4)
    feats = extract_features(spec, cfg)
    col = bin_idx - 4
    assert np.ptp(feats.channels[1][:, col]) < 1e-6
    assert np.ptp(feats.channels[2][:, col]) < 1e-6
    # raw phase does advance between frames for off-multiple advances
    expected_advance = 2 * np.pi * bin_idx * cfg.hop_size / cfg.fft_size
    if abs(np.angle(np.exp(1j * expected_advance))) > 1e-6:
        phases = np.angle(spec.bins[:, col])
        assert np.ptp(phases) > 1e-3


def test_features_zero_spectrogram_conventions():
    from trimask.types import ComplexSpectrogram

    spec = ComplexSpectrogram(bins=np.zeros((6, 253), dtype=complex), bin_offset=4)
    feats = extract_features(spec, RT_PRESET)
    ch = feats.channels
    assert np.allclose(ch[0], np.log(EPS_MAG))
    assert np.all(ch[1] == 1.0)
    assert np.all(ch[2] == 0.0)
    assert np.all(ch[3] == 0.0)
    assert np.all(ch[4] == 0.0)


def test_features_shapes_and_unit_circle():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(16000)
    spec = trim_low_bins(stft(x, RT_PRESET), 4)
    feats = extract_features(spec, RT_PRESET)
    assert feats.channels.shape == (5, spec.frame_count, spec.bin_count)
    radius = feats.channels[1] ** 2 + feats.channels[2] ** 2
    assert np.max(np.abs(radius - 1.0)) <= 1e-6


def test_stftconfig_validation():
    with pytest.raises(ValueError):
        StftConfig(window_size=512, hop_size=100, fft_size=512)
    with pytest.raises(ValueError):
        StftConfig(window_size=512, hop_size=128, fft_size=256)
    assert RT_PRESET.bin_count == 257
    assert NRT_PRESET.bin_count == 513


def test_shipped_preset_parameters():
    from trimask.spectral import PRESETS

    rt = PRESETS["rt"]
    assert (rt.window_size, rt.hop_size, rt.fft_size, rt.discard_low_bins) \
        == (512, 128, 512, 4)
    nrt = PRESETS["nrt"]
    assert (nrt.window_size, nrt.hop_size, nrt.fft_size, nrt.discard_low_bins) \
        == (1024, 256, 1024, 0)
    assert rt.bin_count - rt.discard_low_bins == 253
