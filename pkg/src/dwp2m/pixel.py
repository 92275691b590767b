"""One in-pixel compute channel: weight cells, signed accumulators, dividers.

Input events push a write current, set by the weight cell, through the heavy
metal of the positive or negative accumulator MTJ.  At the end of an
integration window the two accumulators form a series divider whose midpoint
(pre-activation) is compared against a second, programmable divider
(threshold).  A spike resets both accumulators; otherwise their wall
positions carry over to the next window.

Voltage-dependent resistances make both dividers and the resistive write
branches nonlinear; all of them are solved self-consistently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .device import DeviceParams, DwState, reset, resistance, step
from .montecarlo import NOMINAL, VariationSample

DIVIDER_RTOL = 1e-9
DIVIDER_MAX_ITER = 100


class Sign(Enum):
    POS = "positive"
    NEG = "negative"


@dataclass(frozen=True)
class CmosOnly:
    width_norm: float

    def __post_init__(self):
        if not 0.0 < self.width_norm <= 1.0:
            raise ValueError("width_norm must lie in (0, 1]")


@dataclass(frozen=True)
class MdwOnly:
    d_weight: float

    def __post_init__(self):
        if not 0.0 <= self.d_weight <= 1.0:
            raise ValueError("d_weight must lie in [0, 1]")


@dataclass(frozen=True)
class Hybrid:
    width_norm: float
    d_weight: float

    def __post_init__(self):
        if not 0.0 < self.width_norm <= 1.0:
            raise ValueError("width_norm must lie in (0, 1]")
        if not 0.0 <= self.d_weight <= 1.0:
            raise ValueError("d_weight must lie in [0, 1]")


CellConfig = Union[CmosOnly, MdwOnly, Hybrid]
CONFIG_TAGS = ("cmos", "mdw", "hybrid")


@dataclass(frozen=True)
class WeightCell:
    sign: Sign
    config: CellConfig
    params: DeviceParams = field(default_factory=DeviceParams, repr=False)


class ConvergenceError(RuntimeError):
    pass


class FabricationGuardError(RuntimeError):
    """A weight current could reach the weight MTJ's own depinning threshold."""


class ReprogramError(ValueError):
    pass


def solve_share(r_a, r_b, v_total, rtol=DIVIDER_RTOL, max_iter=DIVIDER_MAX_ITER):
    """Fraction of ``v_total`` dropped across element A of a two-element series string.

    ``r_a`` and ``r_b`` map the voltage across each element to its resistance
    (array-valued is fine).  Plain fixed-point iteration on the share.
    """
    s = r_a(0.0) / (r_a(0.0) + r_b(0.0))
    for _ in range(max_iter):
        ra = r_a(s * v_total)
        rb = r_b((1.0 - s) * v_total)
        s_new = ra / (ra + rb)
        if np.all(np.abs(s_new - s) <= rtol * np.abs(s_new)):
            return s_new
        s = s_new
    raise ConvergenceError(f"divider bias did not converge in {max_iter} iterations")


# --- write path ----------------------------------------------------------------

def transistor_resistance(width_norm, p: DeviceParams):
    return p.v_dd / (p.i_unit * 1e-6 * np.asarray(width_norm, dtype=float))


def branch_current(kind: str, width_norm, d_weight, m_tx, m_r, p: DeviceParams):
    """Unclamped write current (uA) of a weight branch; vectorized over all arguments."""
    if kind == "cmos":
        return p.i_unit * np.asarray(width_norm, dtype=float) * m_tx
    if kind == "mdw":
        r_series = p.r_fixed + 0.0 * np.asarray(m_tx, dtype=float)
    elif kind == "hybrid":
        r_series = transistor_resistance(width_norm, p) / m_tx
    else:
        raise ValueError(f"unknown weight configuration '{kind}'")
    r_mtj = lambda v: resistance(d_weight, v, p) * m_r
    s = solve_share(r_mtj, lambda v: r_series, p.v_dd)
    return 1e6 * p.v_dd / (r_series + r_mtj(s * p.v_dd))


def clamp_current(i, p: DeviceParams):
    i = np.clip(i, 0.0, p.i_max)
    if np.any(i >= p.i_th2):
        raise FabricationGuardError(f"write current reached i_th2={p.i_th2} uA")
    return i


def _kind(cfg: CellConfig) -> str:
    return {CmosOnly: "cmos", MdwOnly: "mdw", Hybrid: "hybrid"}[type(cfg)]


def write_current(cell: WeightCell, sample: VariationSample = NOMINAL) -> float:
    """Current (uA) the cell drives into its accumulator on one input event."""
    cfg = cell.config
    width = getattr(cfg, "width_norm", 1.0)
    d = getattr(cfg, "d_weight", 0.0)
    i = branch_current(_kind(cfg), width, d, sample.m_tx, sample.m_r_weight, cell.params)
    return float(clamp_current(i, cell.params))


# --- weight calibration ----------------------------------------------------------

def current_range(kind: str, p: DeviceParams, d_hybrid: float = 0.5) -> tuple[float, float]:
    """Nominal current span covered by |w| in (0, 1] for a configuration."""
    if kind == "cmos":
        return 0.0, float(clamp_current(p.i_unit, p))
    if kind == "mdw":
        lo = branch_current("mdw", 1.0, 1.0, 1.0, 1.0, p)
        hi = branch_current("mdw", 1.0, 0.0, 1.0, 1.0, p)
        return float(clamp_current(lo, p)), float(clamp_current(hi, p))
    if kind == "hybrid":
        return 0.0, float(clamp_current(branch_current("hybrid", 1.0, d_hybrid, 1.0, 1.0, p), p))
    raise ValueError(kind)


def mdw_position_for(x: float, p: DeviceParams) -> float:
    """Weight-MTJ position whose nominal current sits at fraction ``x`` of the MTJ-only span."""
    lo, hi = current_range("mdw", p)
    target = lo + x * (hi - lo)
    if x <= 0.0:
        return 1.0
    if x >= 1.0:
        return 0.0
    f = lambda d: float(branch_current("mdw", 1.0, d, 1.0, 1.0, p)) - target
    return float(brentq(f, 0.0, 1.0, xtol=1e-13))


def cell_for_weight(w: float, kind: str, p: DeviceParams, d_hybrid: float = 0.5) -> WeightCell | None:
    """Map an algorithmic weight in [-1, 1] to a cell; zero maps to no cell.

    CMOS and hybrid cells take width = |w| (hybrids fabricated with the weight
    MTJ at ``d_hybrid`` so it can be retuned both ways); MTJ-only cells invert
    their current curve numerically.
    """
    if not -1.0 <= w <= 1.0:
        raise ValueError("weight outside [-1, 1]")
    if w == 0.0:
        return None
    sign = Sign.POS if w > 0 else Sign.NEG
    a = abs(w)
    if kind == "cmos":
        cfg = CmosOnly(a)
    elif kind == "mdw":
        cfg = MdwOnly(mdw_position_for(a, p))
    elif kind == "hybrid":
        cfg = Hybrid(a, d_hybrid)
    else:
        raise ValueError(kind)
    return WeightCell(sign, cfg, p)


# --- channel -----------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelState:
    weights: tuple
    acc_pos: DwState = DwState(0.0)
    acc_neg: DwState = DwState(0.0)
    thr: tuple[float, float] = (0.5, 0.5)
    params: DeviceParams = field(default_factory=DeviceParams, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not all(0.0 <= t <= 1.0 for t in self.thr):
            raise ValueError("threshold positions must lie in [0, 1]")


def apply_event(ch: ChannelState, pixel_index: int, dt_pulse: float | None = None,
                sample: VariationSample = NOMINAL) -> ChannelState:
    """Route one input event through cell ``pixel_index`` into its accumulator."""
    if not 0 <= pixel_index < len(ch.weights):
        raise IndexError(f"pixel index {pixel_index} outside kernel of {len(ch.weights)}")
    cell = ch.weights[pixel_index]
    if cell is None:
        return ch
    dt = (ch.params.t_pulse if dt_pulse is None else dt_pulse) * sample.m_jitter
    i = write_current(cell, sample)
    if cell.sign is Sign.POS:
        return replace(ch, acc_pos=step(ch.acc_pos, i, dt, ch.params))
    return replace(ch, acc_neg=step(ch.acc_neg, i, dt, ch.params))


def divider_voltage(q_low, q_high, m_low, m_high, p: DeviceParams):
    """Voltage across the ``q_low`` element of a two-MTJ divider fed by v_read."""
    s = solve_share(
        lambda v: resistance(q_low, v, p) * m_low,
        lambda v: resistance(q_high, v, p) * m_high,
        p.v_read,
    )
    return p.v_read * s


def preactivation(ch: ChannelState, sample: VariationSample = NOMINAL) -> float:
    return float(divider_voltage(ch.acc_pos.q_norm, ch.acc_neg.q_norm,
                                 sample.m_r_acc_pos, sample.m_r_acc_neg, ch.params))


def threshold_voltage(ch: ChannelState, sample: VariationSample = NOMINAL) -> float:
    return float(divider_voltage(ch.thr[0], ch.thr[1], sample.m_r_thr1, sample.m_r_thr2, ch.params))


def fire_and_reset(ch: ChannelState, sample: VariationSample = NOMINAL) -> tuple[int, ChannelState]:
    """Synchronous threshold at a window boundary; fires on v_pre >= v_th."""
    if preactivation(ch, sample) >= threshold_voltage(ch, sample):
        return 1, replace(ch, acc_pos=reset(), acc_neg=reset())
    return 0, ch


def reprogram(ch: ChannelState, d_weights: Sequence[float | None], thr: tuple[float, float] | None = None,
              widths: Sequence[float | None] | None = None) -> ChannelState:
    """Rewrite weight-MTJ and threshold-MTJ positions, then reset both accumulators.

    ``d_weights`` has one entry per cell, ``None`` meaning "leave as is".  CMOS
    cells have no MTJ to program, and transistor widths are fixed at
    fabrication: passing ``widths`` that differ from the current ones fails.
    """
    if len(d_weights) != len(ch.weights):
        raise ReprogramError("d_weights must have one entry per weight cell")
    if widths is not None:
        for cell, w in zip(ch.weights, widths):
            cur = getattr(cell.config, "width_norm", None) if cell is not None else None
            if w is not None and w != cur:
                raise ReprogramError("transistor widths are fixed after fabrication")
    new = []
    for cell, d in zip(ch.weights, d_weights):
        if d is None:
            new.append(cell)
            continue
        if cell is None or isinstance(cell.config, CmosOnly):
            raise ReprogramError("CMOS-only cells cannot be reprogrammed")
        if not 0.0 <= d <= 1.0:
            raise ReprogramError(f"target position {d} outside [0, 1]")
        new.append(replace(cell, config=replace(cell.config, d_weight=float(d))))
    thr = ch.thr if thr is None else tuple(float(t) for t in thr)
    if not all(0.0 <= t <= 1.0 for t in thr):
        raise ReprogramError("threshold positions outside [0, 1]")
    return replace(ch, weights=tuple(new), thr=thr, acc_pos=reset(), acc_neg=reset())
