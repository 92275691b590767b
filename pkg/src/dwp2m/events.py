"""AER event streams and the in-pixel analog first layer.

Input streams carry (t_us, x, y, polarity).  The first layer is a strided
convolution computed per output neuron by a pair of accumulators: each event
fans out to every neuron whose receptive field covers the pixel and moves the
positive or negative accumulator by the f1 displacement of the tap weight.
At every window boundary all neurons threshold their f2 worst-case readout
and the firing ones reset.  Output spikes carry (t_us, ox, oy, channel) with
no polarity bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .fitting import FitModel, eval_f1, eval_f2
from .montecarlo import keyed_normal

NMNIST_SIZE = 34
ON, OFF = 1, 0


class EventFormatError(ValueError):
    pass


def _validate(t, xs, ys, width, height):
    if t.size and np.any(np.diff(t) < 0):
        i = int(np.argmax(np.diff(t) < 0)) + 1
        raise EventFormatError(f"timestamps decrease at event {i}")
    if xs.size and (xs.min() < 0 or xs.max() >= width or ys.min() < 0 or ys.max() >= height):
        raise EventFormatError(f"event coordinates outside {width}x{height} sensor")


@dataclass(frozen=True)
class EventStream:
    """Sensor events; arrays are aligned and sorted by time."""

    width: int
    height: int
    t: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    x: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    p: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int8))

    def __post_init__(self):
        for name, dt in (("t", np.int64), ("x", np.int64), ("y", np.int64), ("p", np.int8)):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=dt))
        if not (self.t.shape == self.x.shape == self.y.shape == self.p.shape):
            raise EventFormatError("event arrays must have equal length")
        if np.any((self.p != ON) & (self.p != OFF)):
            raise EventFormatError("polarity must be 0 (off) or 1 (on)")
        _validate(self.t, self.x, self.y, self.width, self.height)

    def __len__(self):
        return int(self.t.size)

    def __eq__(self, other):
        return (isinstance(other, EventStream) and self.width == other.width and self.height == other.height
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "txyp"))

    def select(self, idx) -> "EventStream":
        return EventStream(self.width, self.height, self.t[idx], self.x[idx], self.y[idx], self.p[idx])


@dataclass(frozen=True)
class SpikeStream:
    """Output AER of the analog layer: (t_us, ox, oy, channel)."""

    width: int
    height: int
    channels: int
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    c: np.ndarray

    def __len__(self):
        return int(self.t.size)

    def __eq__(self, other):
        return (isinstance(other, SpikeStream)
                and (self.width, self.height, self.channels) == (other.width, other.height, other.channels)
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "txyc"))


# --- ingestion ---------------------------------------------------------------------

def parse_nmnist(data: bytes) -> EventStream:
    """Decode N-MNIST binary: 5 bytes per event, x, y, then pol (bit 23) and 23-bit timestamp."""
    if len(data) % 5:
        raise EventFormatError(f"payload length {len(data)} is not a multiple of 5")
    b = np.frombuffer(data, dtype=np.uint8).reshape(-1, 5).astype(np.int64)
    x, y = b[:, 0], b[:, 1]
    p = (b[:, 2] >> 7).astype(np.int8)
    t = ((b[:, 2] & 0x7F) << 16) | (b[:, 3] << 8) | b[:, 4]
    return EventStream(NMNIST_SIZE, NMNIST_SIZE, t, x, y, p)


def pack_nmnist(stream: EventStream) -> bytes:
    t = stream.t
    if t.size and (t.max() >= 1 << 23 or stream.x.max() > 255 or stream.y.max() > 255):
        raise EventFormatError("event does not fit the 5-byte record")
    out = np.empty((len(stream), 5), np.uint8)
    out[:, 0] = stream.x
    out[:, 1] = stream.y
    out[:, 2] = (stream.p.astype(np.int64) << 7) | (t >> 16)
    out[:, 3] = (t >> 8) & 0xFF
    out[:, 4] = t & 0xFF
    return out.tobytes()


_POL = {"1": ON, "on": ON, "0": OFF, "off": OFF}


def parse_csv(text: str, width: int | None = None, height: int | None = None) -> EventStream:
    """Read ``t_us,x,y,polarity`` rows.

    A leading ``# width=W height=H`` comment fixes the sensor size; otherwise
    it comes from the arguments or, failing that, the largest coordinates.
    """
    lines = text.splitlines()
    rows = []
    header_seen = False
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            for tok in s[1:].split():
                k, _, v = tok.partition("=")
                if k == "width":
                    width = int(v)
                elif k == "height":
                    height = int(v)
            continue
        if not header_seen and s.replace(" ", "").lower().startswith("t_us"):
            header_seen = True
            continue
        parts = [c.strip() for c in s.split(",")]
        if len(parts) != 4:
            raise EventFormatError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        try:
            pol = _POL[parts[3].lower()]
            rows.append((int(parts[0]), int(parts[1]), int(parts[2]), pol))
        except (ValueError, KeyError):
            raise EventFormatError(f"line {lineno}: cannot parse {s!r}") from None
        if len(rows) > 1 and rows[-1][0] < rows[-2][0]:
            raise EventFormatError(f"line {lineno}: timestamps must be non-decreasing")
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    if width is None:
        width = int(arr[:, 1].max()) + 1 if len(arr) else 0
    if height is None:
        height = int(arr[:, 2].max()) + 1 if len(arr) else 0
    try:
        return EventStream(width, height, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
    except EventFormatError as exc:
        raise EventFormatError(f"{exc} (declared size {width}x{height})") from None


def emit_csv(stream: EventStream | SpikeStream) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(stream, SpikeStream):
        buf.write(f"# width={stream.width} height={stream.height} channels={stream.channels}\n")
        w.writerow(["t_us", "x", "y", "channel"])
        w.writerows(zip(stream.t.tolist(), stream.x.tolist(), stream.y.tolist(), stream.c.tolist()))
    else:
        buf.write(f"# width={stream.width} height={stream.height}\n")
        w.writerow(["t_us", "x", "y", "polarity"])
        w.writerows(zip(stream.t.tolist(), stream.x.tolist(), stream.y.tolist(), stream.p.tolist()))
    return buf.getvalue()


def window(stream: EventStream, integration_t: int) -> list[EventStream]:
    """Split into half-open windows [k T, (k+1) T) from t = 0 through the last event."""
    if not integration_t > 0:
        raise ValueError("integration_t must be positive")
    if len(stream) == 0:
        return []
    k = stream.t // integration_t
    bounds = np.searchsorted(k, np.arange(int(k[-1]) + 2))
    return [stream.select(slice(bounds[i], bounds[i + 1])) for i in range(int(k[-1]) + 1)]


def window_counts(stream: EventStream, integration_t: int, n_windows: int | None = None) -> np.ndarray:
    """Per-window event counts as an array (windows, 2, height, width); channel 0 = OFF, 1 = ON."""
    if not integration_t > 0:
        raise ValueError("integration_t must be positive")
    k = stream.t // integration_t
    if n_windows is None:
        n_windows = int(k[-1]) + 1 if len(stream) else 0
    out = np.zeros((n_windows, 2, stream.height, stream.width), np.int64)
    keep = k < n_windows
    np.add.at(out, (k[keep], stream.p[keep], stream.y[keep], stream.x[keep]), 1)
    return out


# --- first layer ----------------------------------------------------------------------

def output_size(n_in: int, kernel: int, stride: int) -> int:
    return (n_in - kernel) // stride + 1


@dataclass
class LayerConfig:
    """First-layer geometry, weights and per-channel thresholds.

    ``weights`` has shape (channels, 2, k, k) in "two_channel" polarity mode
    (index 0 = OFF, 1 = ON) or (channels, 1, k, k) in "signed" mode, where an
    OFF event uses the negated weight.  Thresholds are normalized voltages.
    """

    weights: np.ndarray
    thresholds: np.ndarray
    kernel: int = 3
    stride: int = 2
    integration_t: int = 1000
    polarity_mode: str = "two_channel"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.thresholds = np.asarray(self.thresholds, dtype=float).reshape(-1)
        c, pch, kh, kw = self.weights.shape
        if c < 1:
            raise ValueError("need at least one channel")
        if (kh, kw) != (self.kernel, self.kernel):
            raise ValueError("weight kernel does not match kernel size")
        if self.polarity_mode not in ("two_channel", "signed"):
            raise ValueError("polarity_mode must be 'two_channel' or 'signed'")
        if pch != (2 if self.polarity_mode == "two_channel" else 1):
            raise ValueError("weight polarity axis does not match polarity_mode")
        if np.any(np.abs(self.weights) > 1):
            raise ValueError("weights must lie in [-1, 1]")
        if self.thresholds.shape != (c,):
            raise ValueError("need one threshold per channel")
        if self.stride < 1 or self.integration_t <= 0:
            raise ValueError("stride and integration_t must be positive")

    @property
    def channels(self) -> int:
        return self.weights.shape[0]

    def polarity_weights(self) -> np.ndarray:
        """Weights as (channels, 2, k, k) with the OFF/ON axis made explicit."""
        if self.polarity_mode == "two_channel":
            return self.weights
        return np.concatenate([-self.weights, self.weights], axis=1)


def tap_displacements(w: np.ndarray, fit: FitModel):
    """Per-event accumulator displacement (q units) and its std for each tap weight."""
    a = np.abs(w)
    mean, std = eval_f1(fit, a)
    active = w != 0
    dq = np.where(active, fit.dq_offset + mean * fit.dq_scale, 0.0)
    sd = np.where(active, std * fit.dq_scale, 0.0)
    return dq, sd


def conv_accumulate(counts: np.ndarray, kernel: np.ndarray, stride: int) -> np.ndarray:
    """Strided valid correlation of (2, H, W) counts with a (C, 2, k, k) kernel.

    Summation order is fixed (polarity, ky, kx) so results do not depend on
    event order.
    """
    _, h, w = counts.shape
    c, _, k, _ = kernel.shape
    oh, ow = output_size(h, k, stride), output_size(w, k, stride)
    out = np.zeros((c, oh, ow))
    for pol in range(2):
        for ky in range(k):
            for kx in range(k):
                patch = counts[pol, ky:ky + stride * (oh - 1) + 1:stride, kx:kx + stride * (ow - 1) + 1:stride]
                out += kernel[:, pol, ky, kx][:, None, None] * patch[None]
    return out


class ConvResult(NamedTuple):
    spikes: SpikeStream
    window_spikes: np.ndarray
    """Spike count per window."""
    q_pos: np.ndarray
    q_neg: np.ndarray
    """Accumulator positions after the last window."""


def conv_forward_analog(stream: EventStream, cfg: LayerConfig, fit: FitModel, noise_scale: float = 0.0,
                        seed: int = 0, n_windows: int | None = None) -> ConvResult:
    """Run the analog first layer over a stream.

    With ``noise_scale`` > 0, each (window, neuron, tap) adds Gaussian noise of
    std noise_scale * sqrt(count) * f1_std, and each (window, neuron) readout
    adds noise_scale * f2_std; all draws are keyed on ``seed``.
    """
    if stream.width < cfg.kernel or stream.height < cfg.kernel:
        raise ValueError(f"{stream.width}x{stream.height} input is smaller than the kernel")
    counts = window_counts(stream, cfg.integration_t, n_windows)
    pw = cfg.polarity_weights()
    dq, sd = tap_displacements(pw, fit)
    k_pos, k_neg = np.where(pw > 0, dq, 0.0), np.where(pw < 0, dq, 0.0)
    v_pos, v_neg = np.where(pw > 0, sd, 0.0) ** 2, np.where(pw < 0, sd, 0.0) ** 2
    c = cfg.channels
    oh, ow = output_size(stream.height, cfg.kernel, cfg.stride), output_size(stream.width, cfg.kernel, cfg.stride)
    q_pos, q_neg = np.zeros((c, oh, ow)), np.zeros((c, oh, ow))
    ci, yi, xi = np.meshgrid(np.arange(c), np.arange(oh), np.arange(ow), indexing="ij")
    f2_centers, f2_std = fit.f2_noise.get("center"), fit.f2_noise.get("std")
    out_t, out_x, out_y, out_c, per_window = [], [], [], [], []
    for k, cnt in enumerate(counts):
        q_pos = q_pos + conv_accumulate(cnt, k_pos, cfg.stride)
        q_neg = q_neg + conv_accumulate(cnt, k_neg, cfg.stride)
        if noise_scale > 0:
            q_pos = q_pos + noise_scale * np.sqrt(conv_accumulate(cnt, v_pos, cfg.stride)) * keyed_normal(seed, k, 0, ci, yi, xi)
            q_neg = q_neg + noise_scale * np.sqrt(conv_accumulate(cnt, v_neg, cfg.stride)) * keyed_normal(seed, k, 1, ci, yi, xi)
        q_pos, q_neg = np.clip(q_pos, 0.0, 1.0), np.clip(q_neg, 0.0, 1.0)
        diff = q_pos - q_neg
        v = eval_f2(fit, diff, "lower")
        if noise_scale > 0 and f2_std:
            v = v + noise_scale * np.interp(diff, f2_centers, f2_std) * keyed_normal(seed, k, 2, ci, yi, xi)
        fire = v >= cfg.thresholds[:, None, None]
        q_pos, q_neg = np.where(fire, 0.0, q_pos), np.where(fire, 0.0, q_neg)
        cc, yy, xx = np.nonzero(fire)
        per_window.append(cc.size)
        order = np.lexsort((cc, xx, yy))
        out_t.append(np.full(cc.size, (k + 1) * cfg.integration_t, np.int64))
        out_x.append(xx[order]), out_y.append(yy[order]), out_c.append(cc[order])
    cat = lambda a: np.concatenate(a).astype(np.int64) if a else np.zeros(0, np.int64)
    spikes = SpikeStream(ow, oh, c, cat(out_t), cat(out_x), cat(out_y), cat(out_c))
    return ConvResult(spikes, np.array(per_window, np.int64), q_pos, q_neg)


def bandwidth(in_stream, out_stream) -> float:
    """Output-to-input event ratio."""
    n_in = len(in_stream)
    if n_in == 0:
        raise ValueError("bandwidth is undefined for an empty input stream")
    return float(Fraction(len(out_stream), n_in))
