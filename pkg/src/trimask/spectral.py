"""STFT/iSTFT front end, bin trimming, and input feature extraction.

The analysis/synthesis window is a periodic Hann window for both presets.
Inversion uses weighted overlap-add with per-sample normalization by the
summed squared window, which reconstructs interior samples exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .types import ComplexSpectrogram, FeatureStack, SignalBuffer, as_samples

EPS_MAG = 1e-7  # magnitude floor before the log


@dataclass(frozen=True)
class StftConfig:
    window_size: int
    hop_size: int
    fft_size: int
    discard_low_bins: int = 0

    def __post_init__(self):
        if self.window_size % self.hop_size != 0:
            raise ValueError("hop_size must divide window_size")
        if self.fft_size < self.window_size:
            raise ValueError("fft_size must be >= window_size")
        if self.discard_low_bins < 0:
            raise ValueError("discard_low_bins must be >= 0")

    @property
    def bin_count(self) -> int:
        """Untrimmed one-sided bin count."""
        return self.fft_size // 2 + 1

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.window_size:
            return 0
        return (n_samples - self.window_size) // self.hop_size + 1

    def frames_to_samples(self, n_frames: int) -> int:
        return (n_frames - 1) * self.hop_size + self.window_size


# Shipped presets: real-time (512-point, 4 lowest bins discarded) and
# non-real-time (1024-point).
RT_PRESET = StftConfig(window_size=512, hop_size=128, fft_size=512, discard_low_bins=4)
NRT_PRESET = StftConfig(window_size=1024, hop_size=256, fft_size=1024, discard_low_bins=0)

PRESETS = {"rt": RT_PRESET, "nrt": NRT_PRESET}


def _analysis_window(cfg: StftConfig) -> np.ndarray:
    return get_window("hann", cfg.window_size, fftbins=True)


def stft(signal, cfg: StftConfig) -> ComplexSpectrogram:
    """Short-time Fourier transform with a periodic Hann analysis window.

    Frames start every ``hop_size`` samples; only complete windows are
    analyzed (no padding). Returns the untrimmed one-sided spectrogram.
    """
    x = as_samples(signal)
    if len(x) < cfg.window_size:
        raise ValueError(
            f"insufficient samples: need at least {cfg.window_size}, got {len(x)}"
        )
    n_frames = cfg.frame_count(len(x))
    win = _analysis_window(cfg)
    idx = np.arange(cfg.window_size)[None, :] + cfg.hop_size * np.arange(n_frames)[:, None]
    frames = x[idx] * win[None, :]
    bins = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
    return ComplexSpectrogram(bins=bins, bin_offset=0)


def istft(spec: ComplexSpectrogram, cfg: StftConfig, length: int | None = None) -> SignalBuffer:
    """Inverse STFT by weighted overlap-add.

    The synthesis window equals the analysis window; each output sample is
    normalized by the local sum of squared windows, which makes
    ``istft(stft(x))`` exact wherever the window coverage is nonzero.
    Trimmed spectra must be zero-padded back first via
    :func:`restore_low_bins`.
    """
    if spec.bin_count != cfg.bin_count:
        raise ValueError(
            f"shape mismatch: spectrogram has {spec.bin_count} bins, "
            f"config expects {cfg.bin_count} (restore trimmed bins first)"
        )
    n_frames = spec.frame_count
    win = _analysis_window(cfg)
    frames = np.fft.irfft(spec.bins, n=cfg.fft_size, axis=1)[:, : cfg.window_size]
    frames = frames * win[None, :]

    out_len = cfg.frames_to_samples(n_frames)
    y = np.zeros(out_len)
    norm = np.zeros(out_len)
    wsq = win * win
    for t in range(n_frames):
        start = t * cfg.hop_size
        y[start : start + cfg.window_size] += frames[t]
        norm[start : start + cfg.window_size] += wsq
    nonzero = norm > 1e-10
    y[nonzero] /= norm[nonzero]
    y[~nonzero] = 0.0

    if length is not None:
        if length <= out_len:
            y = y[:length]
        else:
            y = np.concatenate([y, np.zeros(length - out_len)])
    return SignalBuffer(samples=y)


def trim_low_bins(spec: ComplexSpectrogram, n: int) -> ComplexSpectrogram:
    """Discard the ``n`` lowest frequency bins (e.g. 257 -> 253 for n=4)."""
    if n >= spec.bin_count:
        raise ValueError(f"cannot trim {n} bins from a {spec.bin_count}-bin spectrogram")
    if n == 0:
        return ComplexSpectrogram(bins=spec.bins.copy(), bin_offset=spec.bin_offset)
    return ComplexSpectrogram(bins=spec.bins[:, n:].copy(), bin_offset=spec.bin_offset + n)


def restore_low_bins(spec: ComplexSpectrogram, n: int) -> ComplexSpectrogram:
    """Zero-fill ``n`` low bins, undoing the shape change of trim_low_bins."""
    if n == 0:
        return ComplexSpectrogram(bins=spec.bins.copy(), bin_offset=spec.bin_offset)
    pad = np.zeros((spec.frame_count, n), dtype=spec.bins.dtype)
    return ComplexSpectrogram(
        bins=np.concatenate([pad, spec.bins], axis=1),
        bin_offset=max(spec.bin_offset - n, 0),
    )


def _wrap_phase(x: np.ndarray) -> np.ndarray:
    # wraps into (-pi, pi]
    return -(np.mod(np.pi - x, 2.0 * np.pi) - np.pi)


def extract_features(spec: ComplexSpectrogram, cfg: StftConfig) -> FeatureStack:
    """Build the 5-channel input feature stack from a (trimmed) spectrogram.

    ch0: log(|X| + eps); ch1/ch2: cos/sin of the demodulated phase, where
    demodulation removes the expected per-frame advance
    2*pi*f*hop/fft_size of each bin's physical frequency; ch3: group delay
    (wrapped backward difference along f, first column zero); ch4:
    delta-phase (wrapped backward difference along t, first row zero).
    Zero-magnitude bins take phase 0, so their demodulated phase is 0.
    """
    mag = np.abs(spec.bins)
    phase = np.angle(spec.bins)
    n_frames, n_bins = spec.bins.shape

    ch0 = np.log(mag + EPS_MAG)

    f_phys = np.arange(n_bins) + spec.bin_offset
    t_idx = np.arange(n_frames)
    ramp = 2.0 * np.pi * cfg.hop_size / cfg.fft_size * np.outer(t_idx, f_phys)
    demod = _wrap_phase(phase - ramp)
    demod = np.where(mag == 0.0, 0.0, demod)
    ch1 = np.cos(demod)
    ch2 = np.sin(demod)

    ch3 = np.zeros_like(phase)
    ch3[:, 1:] = _wrap_phase(phase[:, 1:] - phase[:, :-1])
    ch4 = np.zeros_like(phase)
    ch4[1:, :] = _wrap_phase(phase[1:, :] - phase[:-1, :])

    return FeatureStack(channels=np.stack([ch0, ch1, ch2, ch3, ch4]))
