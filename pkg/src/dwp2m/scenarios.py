"""Scripted single-channel replays: event lists through one 3x3 weight kernel.

A replay feeds a time-ordered list of (t_us, pixel) events into a
:class:`ChannelState`, records both accumulator positions after every event,
and finishes with the synchronous threshold decision.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .device import DeviceParams, DwState
from .montecarlo import NOMINAL, VariationSample, VariationSpec, keyed_uniform, run_trials, sample
from .pixel import (ChannelState, Hybrid, Sign, WeightCell, apply_event, cell_for_weight, fire_and_reset,
                    preactivation, reprogram, threshold_voltage)


class Replay(NamedTuple):
    t_us: np.ndarray
    pixel: np.ndarray
    q_pos: np.ndarray
    q_neg: np.ndarray
    v_pre: float
    v_th: float
    spike: int
    final: ChannelState


def replay(ch: ChannelState, events: Sequence[tuple[int, int]], sample_: VariationSample = NOMINAL) -> Replay:
    """Apply events in order, then threshold once at the window boundary."""
    ts, px, qp, qn = [], [], [], []
    for t, pix in events:
        ch = apply_event(ch, int(pix), sample=sample_)
        ts.append(t), px.append(pix), qp.append(ch.acc_pos.q_norm), qn.append(ch.acc_neg.q_norm)
    v_pre, v_th = preactivation(ch, sample_), threshold_voltage(ch, sample_)
    spike, ch = fire_and_reset(ch, sample_)
    return Replay(np.array(ts, np.int64), np.array(px, np.int64), np.array(qp), np.array(qn),
                  v_pre, v_th, spike, ch)


# --- 1 ms kernel scenario ----------------------------------------------------------------

KERNEL_WEIGHTS = (0.9, -0.3, 0.6, 0.8, -0.5, 0.7, -0.4, 0.5, 1.0)
KERNEL_THR = (0.2, 0.8)


def kernel_events(seed: int = 0, window_us: int = 1000, per_pixel: int = 4) -> list[tuple[int, int]]:
    """``per_pixel`` events on each of the 9 pixels at keyed random times inside one window."""
    pix = np.repeat(np.arange(9), per_pixel)
    t = np.floor(keyed_uniform(seed, 41, np.arange(pix.size)) * window_us).astype(np.int64)
    order = np.lexsort((pix, t))
    return list(zip(t[order].tolist(), pix[order].tolist()))


def kernel_channel(p: DeviceParams = DeviceParams(), weights=KERNEL_WEIGHTS, thr=KERNEL_THR) -> ChannelState:
    cells = tuple(cell_for_weight(w, "hybrid", p) for w in weights)
    return ChannelState(cells, thr=thr, params=p)


@dataclass
class KernelMC:
    v_pre: np.ndarray
    v_th: np.ndarray
    spike: np.ndarray
    monotone: np.ndarray
    q_pos: np.ndarray
    q_neg: np.ndarray

    @property
    def margin(self) -> np.ndarray:
        return self.v_pre - self.v_th

    @property
    def consistent(self) -> bool:
        m = self.margin
        return bool(np.all(m > 0) or np.all(m < 0))


def kernel_monte_carlo(spec: VariationSpec = VariationSpec(), p: DeviceParams = DeviceParams(),
                       event_seed: int = 0, workers: int = 1) -> KernelMC:
    """Replay the kernel scenario once per Monte Carlo trial."""
    ch = kernel_channel(p)
    events = kernel_events(event_seed)

    def one(t):
        r = replay(ch, events, sample(spec, t))
        mono = bool(np.all(np.diff(r.q_pos) >= 0) and np.all(np.diff(r.q_neg) >= 0))
        return r.v_pre, r.v_th, r.spike, mono, r.q_pos, r.q_neg

    rows = run_trials(spec, one, workers)
    cols = list(zip(*rows))
    return KernelMC(np.array(cols[0]), np.array(cols[1]), np.array(cols[2]), np.array(cols[3]),
                    np.array(cols[4]), np.array(cols[5]))


# --- two-application reprogramming scenario ------------------------------------------------

class TwoApp(NamedTuple):
    first: Replay
    second: Replay


def two_app_channel(p: DeviceParams = DeviceParams(), width: float = 0.5) -> ChannelState:
    cells = (WeightCell(Sign.POS, Hybrid(width, 0.9), p), WeightCell(Sign.NEG, Hybrid(width, 0.1), p))
    return ChannelState(cells, thr=(0.5, 0.5), params=p)


def two_app_events(n: int = 10) -> list[tuple[int, int]]:
    """Alternating events on the positive (0) and negative (1) pixel, 50 us apart."""
    return [(50 * k, k % 2) for k in range(2 * n)]


def two_app_replay(p: DeviceParams = DeviceParams()) -> TwoApp:
    """Same input, two programmings: the first stays silent, the retuned one fires."""
    ch = two_app_channel(p)
    events = two_app_events()
    first = replay(ch, events)
    ch2 = reprogram(first.final, [0.1, 0.9], thr=(0.3, 0.7))
    second = replay(ch2, events)
    return TwoApp(first, second)


# --- config files ------------------------------------------------------------------------

def load_channel(path: str | Path, p: DeviceParams = DeviceParams()) -> ChannelState:
    """``[channel]`` section: kind, weights (signed, one per pixel), optional
    d_weights (MTJ positions overriding the mapping), thr = "t1 t2"."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    if not cp.has_section("channel"):
        raise ValueError(f"{path}: missing [channel] section")
    sec = cp["channel"]
    known = {"kind", "weights", "d_weights", "thr", "d_hybrid"}
    unknown = set(sec) - known
    if unknown:
        raise ValueError(f"unknown channel keys: {sorted(unknown)}")
    kind = sec.get("kind", "hybrid")
    floats = lambda s: [float(v) for v in s.replace(",", " ").split()]
    weights = floats(sec.get("weights", ""))
    if not weights:
        raise ValueError("channel needs at least one weight")
    cells = [cell_for_weight(w, kind, p, sec.getfloat("d_hybrid", 0.5)) for w in weights]
    if "d_weights" in sec:
        d = floats(sec["d_weights"])
        if len(d) != len(cells):
            raise ValueError("d_weights must match weights in length")
        cells = [c if c is None or not hasattr(c.config, "d_weight") else replace(c, config=replace(c.config, d_weight=x))
                 for c, x in zip(cells, d)]
    thr = tuple(floats(sec.get("thr", "0.5 0.5")))
    if len(thr) != 2:
        raise ValueError("thr needs two positions")
    return ChannelState(tuple(cells), acc_pos=DwState(0.0), acc_neg=DwState(0.0), thr=thr, params=p)


def parse_event_list(text: str) -> list[tuple[int, int]]:
    """CSV with columns t_us,pixel; timestamps must be non-decreasing."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#") or s.lower().startswith("t_us"):
            continue
        parts = s.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected t_us,pixel")
        try:
            t, pix = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {s!r}") from None
        if out and t < out[-1][0]:
            raise ValueError(f"line {lineno}: timestamps must be non-decreasing")
        out.append((t, pix))
    return out
