"""Analytic multiplication counts for naive vs streaming execution.

Naive cost is one full forward pass over the analysis window per emitted
frame. Streaming cost is the steady-state work of one push: one new frame
per encoder layer plus the few decoder frames feeding the single emitted
output. Forward convolutions count out_positions x kernel_volume x in_ch x
out_ch; transposed convolutions count in_positions x kernel_volume x in_ch x
out_ch (the same total in gather or scatter form). Bias adds and activation
multiplies are not counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .streaming import StreamPlan, StreamState, stream_push
from .unet import HEAD_CHANNELS, UNetConfig, random_weights, unet_forward

_MODES = ("naive", "streaming", "both")


@dataclass(frozen=True)
class LayerOps:
    name: str
    naive_mults: int
    streaming_mults: int

    @property
    def reduction(self) -> float:
        if self.naive_mults == 0:
            return 0.0
        return 1.0 - self.streaming_mults / self.naive_mults


@dataclass
class OpCountReport:
    layers: list
    mode: str = "both"

    @property
    def naive_total(self) -> int:
        return sum(l.naive_mults for l in self.layers)

    @property
    def streaming_total(self) -> int:
        return sum(l.streaming_mults for l in self.layers)

    @property
    def overall_reduction(self) -> float:
        if self.naive_total == 0:
            return 0.0
        return 1.0 - self.streaming_total / self.naive_total

    def to_text(self) -> str:
        rows = [f"{'layer':>8}  {'naive':>14}  {'streaming':>14}  {'reduction':>9}"]
        for l in self.layers:
            rows.append(f"{l.name:>8}  {l.naive_mults:>14}  {l.streaming_mults:>14}  "
                        f"{100.0 * l.reduction:>8.2f}%")
        rows.append(f"{'total':>8}  {self.naive_total:>14}  {self.streaming_total:>14}  "
                    f"{100.0 * self.overall_reduction:>8.2f}%")
        return "\n".join(rows)

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "layers": [
                {"name": l.name, "naive_mults": l.naive_mults,
                 "streaming_mults": l.streaming_mults, "reduction": l.reduction}
                for l in self.layers
            ],
            "naive_total": self.naive_total,
            "streaming_total": self.streaming_total,
            "overall_reduction": self.overall_reduction,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def count_ops(cfg: UNetConfig, mode: str = "both") -> OpCountReport:
    """Per-layer multiplication counts for one emitted frame in each mode."""
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    plan = StreamPlan(cfg)
    enc_shapes = cfg.encoder_shapes()
    dec_shapes = cfg.decoder_shapes()

    layers = []
    for i, spec in enumerate(cfg.encoder):
        fo, to = enc_shapes[i + 1]
        kv = spec.kernel_f * spec.kernel_t * spec.in_ch * spec.out_ch
        layers.append(LayerOps(f"enc{i + 1}", naive_mults=fo * to * kv,
                               streaming_mults=plan.enc_mults[f"enc{i + 1}"]))
    for j, spec in enumerate(cfg.decoder):
        fi, ti = dec_shapes[j]
        kv = spec.kernel_f * spec.kernel_t * spec.in_ch * spec.out_ch
        layers.append(LayerOps(f"dec{j + 1}", naive_mults=fi * ti * kv,
                               streaming_mults=plan.dec_mults.get(f"dec{j + 1}", 0)))
    if cfg.head_channels:
        if cfg.decoder:
            head_in = cfg.decoder[-1].out_ch
            hf, ht = dec_shapes[-1]
        else:
            head_in = cfg.encoder[-1].out_ch
            hf, ht = enc_shapes[-1]
        layers.append(LayerOps("head", naive_mults=cfg.head_channels * head_in * hf * ht,
                               streaming_mults=plan.head_mults))
    return OpCountReport(layers=layers, mode=mode)


def measured_ops(cfg: UNetConfig, seed: int = 0):
    """Run both backends on random data and return their per-layer
    instrumented multiply tallies: (naive_counts, streaming_per_push).

    The streaming figure is a steady-state per-push delta, taken after the
    first emission.
    """
    if not cfg.decoder or cfg.head_channels != HEAD_CHANNELS:
        raise ValueError("measured_ops needs an inferable config (decoder + 10-ch head)")
    weights = random_weights(cfg, seed)
    rng = np.random.default_rng(seed + 1)

    naive_counts: dict = {}
    window = rng.standard_normal((cfg.in_channels, cfg.in_bins, cfg.in_frames)).astype(weights.dtype)
    unet_forward(window, weights, cfg, counter=naive_counts)

    state = StreamState(cfg, weights)
    for _ in range(state.plan.warmup):
        stream_push(rng.standard_normal((cfg.in_channels, cfg.in_bins)).astype(weights.dtype), state)
    before = dict(state.op_counter)
    stream_push(rng.standard_normal((cfg.in_channels, cfg.in_bins)).astype(weights.dtype), state)
    per_push = {k: state.op_counter[k] - before[k] for k in state.op_counter}
    return naive_counts, per_push
