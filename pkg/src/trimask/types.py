"""Core value types shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SAMPLE_RATE = 16000


def as_samples(signal) -> np.ndarray:
    """Coerce a SignalBuffer or array-like to a 1-D float64 sample array."""
    if isinstance(signal, SignalBuffer):
        return signal.samples
    arr = np.asarray(signal, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected mono 1-D signal, got shape {arr.shape}")
    return arr


@dataclass
class SignalBuffer:
    """Mono time-domain signal at 16 kHz.

    Only finite values are admitted; amplitudes are nominally in [-1, 1]
    but not clipped here.
    """

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"signal must be 1-D, got shape {self.samples.shape}")
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"sample_rate must be {SAMPLE_RATE}, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite values")

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass
class ComplexSpectrogram:
    """Time-frequency grid of complex values, indexed (t, f).

    ``bin_offset`` records how many low-frequency bins have been discarded,
    so bin ``f`` of this grid corresponds to physical FFT bin
    ``f + bin_offset``.
    """

    bins: np.ndarray
    bin_offset: int = 0

    def __post_init__(self):
        self.bins = np.asarray(self.bins)
        if self.bins.ndim != 2:
            raise ValueError(f"spectrogram must be 2-D (t, f), got shape {self.bins.shape}")
        if not np.iscomplexobj(self.bins):
            self.bins = self.bins.astype(np.complex128)

    @property
    def frame_count(self) -> int:
        return self.bins.shape[0]

    @property
    def bin_count(self) -> int:
        return self.bins.shape[1]


@dataclass
class FeatureStack:
    """Five aligned real-valued T x F feature grids.

    Channels: log-magnitude, demodulated-phase cos, demodulated-phase sin,
    group delay, delta-phase.
    """

    channels: np.ndarray  # (5, T, F)

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.channels.ndim != 3 or self.channels.shape[0] != 5:
            raise ValueError(f"expected (5, T, F) feature stack, got {self.channels.shape}")

    @property
    def frame_count(self) -> int:
        return self.channels.shape[1]

    @property
    def bin_count(self) -> int:
        return self.channels.shape[2]
