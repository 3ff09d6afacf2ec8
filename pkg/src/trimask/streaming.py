"""Incremental (streaming) U-Net inference with per-layer frame queues.

The emitted value at push n is defined as the whole-window forward pass over
the analysis window ending at frame n, read out at the target position
(window end minus lookahead). Because every tensor's frame lattice is pinned
to the window end, each encoder layer gains exactly one new frame per push
(at a fixed offset behind the newest input frame) and all older frames are
reused from ring buffers. Strided layers interleave prod(s_l) lattice phases
in one ring; required_queues() reports that phase count.

Decoder transposed-convolution frames near the stream edge have truncated
contributor sets whose values legitimately change as the window advances, so
the (few) frames feeding the single emitted output are recomputed each push;
the skip-connection inputs they consume come from the encoder rings and are
never recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .unet import UNetConfig, WeightSet, HEAD_CHANNELS, leaky, split_head_frame


def required_queues(cfg: UNetConfig, depth: int) -> int:
    """Number of stride-phase queues at an encoder depth: prod of temporal
    strides of layers 1..depth."""
    if not (1 <= depth <= cfg.depth):
        raise ValueError(f"depth must be in [1, {cfg.depth}], got {depth}")
    count = 1
    for spec in cfg.encoder[:depth]:
        count *= spec.stride_t
    return count


@dataclass(frozen=True)
class _DecoderStep:
    """One decoder layer's per-push work: output frames and their real taps."""
    layer: int                 # 1-based decoder layer
    out_frames: tuple          # window indices of frames to compute
    taps: tuple                # per out frame: tuple of (in_idx, kernel_tap)
    skip_level: int            # encoder level providing the concat half (0 = none)


class StreamPlan:
    """Static per-config schedule for one push (window coordinates)."""

    def __init__(self, cfg: UNetConfig):
        self.cfg = cfg
        L = cfg.depth
        t0 = cfg.in_frames

        # encoder geometry
        self.enc_T = [t0]
        self.lattice = [1]
        self.delta = [0]  # lookback of each level's newest frame behind the push
        for spec in cfg.encoder:
            self.delta.append(self.delta[-1] + (spec.kernel_t - 1) * self.lattice[-1])
            self.lattice.append(self.lattice[-1] * spec.stride_t)
            self.enc_T.append((self.enc_T[-1] - spec.kernel_t) // spec.stride_t + 1)
        for l in range(L + 1):
            assert self.delta[l] == (t0 - 1) - (self.enc_T[l] - 1) * self.lattice[l]

        self.enc_F = [cfg.in_bins]
        for spec in cfg.encoder:
            self.enc_F.append((self.enc_F[-1] - spec.kernel_f) // spec.stride_f + 1)

        self.warmup = t0  # pushes before the first emission

        # decoder needs, resolved backward from the single target frame
        self.steps: list[_DecoderStep] = []
        enc_needs = {l: set() for l in range(1, L + 1)}
        if cfg.decoder and cfg.head_channels == HEAD_CHANNELS:
            dec_T = [self.enc_T[L]]
            for spec in cfg.decoder:
                dec_T.append((dec_T[-1] - 1) * spec.stride_t + spec.kernel_t)
            assert dec_T[L] == t0
            self.dec_T = dec_T

            needed = {cfg.target_index}
            rev_steps = []
            for j in range(L, 0, -1):
                spec = cfg.decoder[j - 1]
                kt, st = spec.kernel_t, spec.stride_t
                in_len = dec_T[j - 1]
                out_frames = tuple(sorted(needed))
                taps = []
                need_in = set()
                for p in out_frames:
                    lo = max(0, -(-(p - kt + 1) // st))  # ceil
                    hi = min(in_len - 1, p // st)
                    row = tuple((q, p - q * st) for q in range(lo, hi + 1))
                    if not row:
                        raise ValueError(f"dec{j}: output frame {p} has no contributors")
                    taps.append(row)
                    need_in.update(q for q, _ in row)
                skip_level = L - j + 1 if j >= 2 else 0
                if skip_level:
                    enc_needs[skip_level].update(need_in)
                else:
                    enc_needs[L].update(need_in)
                rev_steps.append(_DecoderStep(layer=j, out_frames=out_frames,
                                              taps=tuple(taps), skip_level=skip_level))
                needed = need_in
            self.steps = list(reversed(rev_steps))
            self.bottleneck_frames = tuple(sorted(needed))

        # ring capacities: newest frame of level l sits delta[l] behind the
        # push; capacity covers the oldest slot any consumer asks for
        self.capacity = [0] * (L + 1)
        for l in range(L + 1):
            lookbacks = [self.delta[l]]
            if l < L:
                lookbacks.append(self.delta[l + 1])  # oldest tap of level l+1
            if l >= 1 and enc_needs[l]:
                lookbacks.append((t0 - 1) - min(enc_needs[l]) * self.lattice[l])
            self.capacity[l] = max(lookbacks) - self.delta[l] + 1

        # per-push analytic multiplication counts (steady state)
        self.enc_mults = {}
        for i, spec in enumerate(cfg.encoder):
            self.enc_mults[f"enc{i + 1}"] = (self.enc_F[i + 1] * spec.kernel_f
                                             * spec.kernel_t * spec.in_ch * spec.out_ch)
        self.dec_mults = {}
        for step in self.steps:
            spec = cfg.decoder[step.layer - 1]
            n_taps = sum(len(row) for row in step.taps)
            # decoder layer j consumes frames at encoder level L-j+1's extent
            f_in = self.enc_F[cfg.depth - step.layer + 1]
            self.dec_mults[f"dec{step.layer}"] = (n_taps * f_in * spec.kernel_f
                                                  * spec.in_ch * spec.out_ch)
        self.head_mults = 0
        if cfg.head_channels:
            if cfg.decoder:
                self.head_mults = cfg.head_channels * cfg.decoder[-1].out_ch * cfg.in_bins
            else:
                self.head_mults = cfg.head_channels * cfg.encoder[-1].out_ch * self.enc_F[L]


class _Ring:
    """Fixed-capacity per-layer frame cache keyed by absolute slot index."""

    def __init__(self, capacity: int, shape: tuple, dtype):
        self.capacity = capacity
        self.buf = np.zeros((capacity,) + shape, dtype=dtype)
        self.newest = -1

    def append(self, slot: int, frame: np.ndarray) -> None:
        self.buf[slot % self.capacity] = frame
        self.newest = slot

    def get(self, slot: int) -> np.ndarray:
        if slot > self.newest or slot <= self.newest - self.capacity:
            raise KeyError(f"slot {slot} not cached (newest {self.newest}, "
                           f"capacity {self.capacity})")
        return self.buf[slot % self.capacity]


class StreamState:
    """Mutable per-stream state: frame queues, counters, op tallies.

    Exclusively owned by one stream; feed frames in temporal order through
    :func:`stream_push`.
    """

    def __init__(self, cfg: UNetConfig, weights: WeightSet, plan: StreamPlan | None = None):
        from .unet import validate_weights

        validate_weights(cfg, weights)
        self.cfg = cfg
        self.weights = weights
        self.plan = plan if plan is not None else StreamPlan(cfg)
        dtype = weights.dtype
        self.rings = [_Ring(self.plan.capacity[0], (cfg.in_channels, cfg.in_bins), dtype)]
        for l, spec in enumerate(cfg.encoder):
            self.rings.append(_Ring(self.plan.capacity[l + 1],
                                    (spec.out_ch, self.plan.enc_F[l + 1]), dtype))
        self.frames_ingested = 0
        self.emitted_count = 0
        self.op_counter = {name: 0 for name in cfg.layer_names()}
        # decoder frame windows from the latest push; scratch, not reusable:
        # edge-truncated values change as the window advances
        self.decoder_frames = [{} for _ in cfg.decoder]

    def queue_depths(self):
        """Logical stride-phase queue count per encoder depth."""
        return [required_queues(self.cfg, d) for d in range(1, self.cfg.depth + 1)]


def _encoder_step(state: StreamState, level: int, slot: int) -> np.ndarray:
    """Compute encoder `level`'s frame at absolute slot index `slot`."""
    cfg = state.cfg
    plan = state.plan
    spec = cfg.encoder[level - 1]
    w = state.weights[f"enc{level}.weight"]
    b = state.weights[f"enc{level}.bias"]
    kt = spec.kernel_t
    src = state.rings[level - 1]
    frames = [src.get(slot + i * plan.lattice[level - 1]) for i in range(kt)]
    x = np.stack(frames, axis=-1)  # (C, F, kt)
    C, F, _ = x.shape
    kf, sf = spec.kernel_f, spec.stride_f
    Fo = (F - kf) // sf + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, kf, axis=1)[:, ::sf]  # (C, Fo, kt, kf)
    cols = np.ascontiguousarray(windows.transpose(0, 3, 2, 1)).reshape(C * kf * kt, Fo)
    y = (w.reshape(spec.out_ch, -1) @ cols)
    y += b[:, None]
    state.op_counter[f"enc{level}"] += spec.out_ch * C * kf * kt * Fo
    return leaky(y, cfg.activation_slope)


def _freq_transposed(v: np.ndarray, w_tap: np.ndarray, sf: int) -> np.ndarray:
    """Frequency-axis transposed convolution of one frame for one temporal tap."""
    O, C, kf = w_tap.shape
    F = v.shape[1]
    out = np.zeros((O, (F - 1) * sf + kf), dtype=v.dtype)
    for i in range(kf):
        out[:, i : i + (F - 1) * sf + 1 : sf] += w_tap[:, :, i] @ v
    return out


def _decode(state: StreamState, push_index: int):
    cfg = state.cfg
    plan = state.plan
    w_start = push_index - (cfg.in_frames - 1)
    L = cfg.depth

    frames = {q: state.rings[L].get(w_start + q * plan.lattice[L])
              for q in plan.bottleneck_frames}
    for step in plan.steps:
        spec = cfg.decoder[step.layer - 1]
        w = state.weights[f"dec{step.layer}.weight"]
        b = state.weights[f"dec{step.layer}.bias"]
        skip_ring = state.rings[step.skip_level] if step.skip_level else None
        skip_lattice = plan.lattice[step.skip_level] if step.skip_level else 0
        out = {}
        tally = 0
        for p, row in zip(step.out_frames, step.taps):
            acc = None
            for q, tap in row:
                v = frames[q]
                if skip_ring is not None:
                    v = np.concatenate([v, skip_ring.get(w_start + q * skip_lattice)], axis=0)
                w_tap = w[:, :, :, tap]
                term = _freq_transposed(v, w_tap, spec.stride_f)
                tally += w_tap.shape[0] * v.shape[0] * w_tap.shape[2] * v.shape[1]
                acc = term if acc is None else acc + term
            acc += b[:, None]
            out[p] = leaky(acc, cfg.activation_slope)
        state.op_counter[f"dec{step.layer}"] += tally
        state.decoder_frames[step.layer - 1] = out
        frames = out

    final = frames[cfg.target_index]
    hw = state.weights["head.weight"]
    logits = hw.reshape(cfg.head_channels, -1) @ final
    logits += state.weights["head.bias"][:, None]
    state.op_counter["head"] += cfg.head_channels * hw.shape[1] * cfg.in_bins
    return logits


def stream_push(frame: np.ndarray, state: StreamState):
    """Ingest one feature frame (in_channels, bins); returns the
    (direct, noise) MaskLogits for frame n - lookahead once the first full
    analysis window exists, else None."""
    cfg = state.cfg
    plan = state.plan
    frame = np.asarray(frame, dtype=state.weights.dtype)
    if frame.shape != (cfg.in_channels, cfg.in_bins):
        raise ValueError(f"expected frame shape ({cfg.in_channels}, {cfg.in_bins}), "
                         f"got {frame.shape}")
    n = state.frames_ingested
    state.rings[0].append(n, frame)
    for level in range(1, cfg.depth + 1):
        if n >= plan.delta[level]:
            out = _encoder_step(state, level, n - plan.delta[level])
            state.rings[level].append(n - plan.delta[level], out)
    state.frames_ingested += 1

    if not plan.steps or n < plan.warmup - 1:
        return None
    logits = _decode(state, n)
    state.emitted_count += 1
    return split_head_frame(logits)
