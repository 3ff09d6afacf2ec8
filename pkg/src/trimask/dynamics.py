"""Zero-delay single-band dynamic range compression.

The detector averages the squared signal over a short causal window (2 ms)
and smooths that power with a one-pole follower using attack/release
coefficients 1 - exp(-1/(ms * 16)); the tracked level is an RMS measure and
levels are RMS dB. The pre-average removes the double-frequency ripple of
tonal inputs, which would otherwise bias the asymmetric follower above the
RMS level. Gain is applied sample-synchronously with no lookahead: output n
depends only on inputs <= n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import SignalBuffer, as_samples

_ENV_FLOOR = 1e-30
_POWER_WINDOW = 32  # 2 ms at 16 kHz, causal


@dataclass(frozen=True)
class DrcConfig:
    threshold_db: float = -18.0
    ratio: float = 3.0
    attack_ms: float = 5.0
    release_ms: float = 50.0
    makeup_db: float = 0.0

    def __post_init__(self):
        if self.ratio < 1.0:
            raise ValueError("ratio must be >= 1")
        if self.attack_ms <= 0 or self.release_ms <= 0:
            raise ValueError("attack/release must be positive")


def compress(signal, cfg: DrcConfig = DrcConfig()) -> SignalBuffer:
    """Feedforward compressor: gain_db = min(0, (threshold - env_db) *
    (1 - 1/ratio)) + makeup_db, evaluated per sample."""
    x = as_samples(signal)
    makeup = 10.0 ** (cfg.makeup_db / 20.0)
    if cfg.ratio == 1.0:
        return SignalBuffer(samples=x * makeup)

    a_att = 1.0 - math.exp(-1.0 / (cfg.attack_ms * 16.0))
    a_rel = 1.0 - math.exp(-1.0 / (cfg.release_ms * 16.0))
    slope = 1.0 - 1.0 / cfg.ratio

    # causal moving-average power (partial windows at the head)
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    start = np.maximum(np.arange(len(x)) + 1 - _POWER_WINDOW, 0)
    power = (csum[1:] - csum[start]) / (np.arange(len(x)) + 1 - start)

    out = np.empty_like(x)
    env = 0.0
    for n in range(len(x)):
        p = power[n]
        coeff = a_att if p > env else a_rel
        env += coeff * (p - env)
        env_db = 10.0 * math.log10(env + _ENV_FLOOR)
        gain_db = min(0.0, (cfg.threshold_db - env_db) * slope) + cfg.makeup_db
        out[n] = x[n] * 10.0 ** (gain_db / 20.0)
    return SignalBuffer(samples=out)
