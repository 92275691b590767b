"""Behavioral compact model of an SOT-driven domain-wall MTJ.

The free layer hosts one domain wall whose normalized position ``q`` (0 at the
left edge, fully parallel; 1 at the right edge, fully antiparallel) is the only
state.  Writes go through the heavy metal and move the wall with a velocity
given by a quadratic fit in the write current; reads see three junctions in
parallel (P region, AP region and the wall slice itself).

Units: lengths in nm, resistances in ohm, currents in uA, voltages in V,
velocities in m/s, times in s.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

NM = 1e-9


class DeviceParamError(ValueError):
    """Raised for parameter sets that violate the device invariants."""


@dataclass(frozen=True)
class DeviceParams:
    """Geometric, electrical and fit constants of one MDWMTJ plus its CMOS drive.

    The shipped values are illustrative; nothing downstream assumes they
    describe a real stack.
    """

    l_fl: float = 500.0
    """Free-layer length (nm)."""
    dw_width: float = 20.0
    """Width of the wall region (nm)."""
    r_p0: float = 10e3
    """Full-area parallel resistance at zero bias (ohm)."""
    tmr0: float = 2.0
    """Zero-bias TMR, (R_AP - R_P) / R_P."""
    r_n0: float = 20e3
    """Full-area resistance of the perpendicular (wall) state (ohm)."""
    r_hm: float = 500.0
    """Heavy-metal series resistance (ohm)."""
    v_half: float = 0.5
    """Bias at which the TMR drops to half its zero-bias value (V)."""
    i_th: float = 5.0
    """Depinning threshold of the accumulator MTJ (uA)."""
    i_th2: float = 60.0
    """Depinning threshold of weight MTJs; must exceed every write current (uA)."""
    i_max: float = 55.0
    """Upper end of the fitted velocity range and write-current compliance (uA)."""
    vel_coeffs: tuple[float, float, float] = (-21.0, 4.4, -0.04)
    """(a0, a1, a2) of v(i) = a0 + a1 i + a2 i^2 in m/s with i in uA."""
    v_read: float = 0.4
    """Read supply across each series divider (V)."""
    i_unit: float = 55.0
    """Saturation current of a unit-width weight transistor (uA)."""
    v_dd: float = 0.5
    """Write supply of resistive (MTJ / hybrid) weight branches (V)."""
    r_fixed: float = 500.0
    """Access resistance in series with an MTJ-only weight (ohm)."""
    t_pulse: float = 1e-9
    """Nominal write-pulse duration per input event (s)."""

    def __post_init__(self):
        object.__setattr__(self, "vel_coeffs", tuple(float(c) for c in self.vel_coeffs))
        if len(self.vel_coeffs) != 3:
            raise DeviceParamError("vel_coeffs must hold exactly three coefficients")
        if not self.l_fl > 0:
            raise DeviceParamError("l_fl must be positive")
        if not 0 <= self.dw_width < self.l_fl:
            raise DeviceParamError("dw_width must lie in [0, l_fl)")
        for name in ("r_p0", "tmr0", "r_n0", "v_half", "i_th", "v_read", "i_unit", "v_dd", "t_pulse"):
            if not getattr(self, name) > 0:
                raise DeviceParamError(f"{name} must be positive")
        if self.r_hm < 0 or self.r_fixed < 0:
            raise DeviceParamError("series resistances must be non-negative")
        if not self.i_max > self.i_th:
            raise DeviceParamError("i_max must exceed i_th")
        if not self.i_th2 > self.i_max:
            raise DeviceParamError(
                f"weight-MTJ threshold i_th2={self.i_th2} uA must exceed the maximum "
                f"write current i_max={self.i_max} uA"
            )
        grid = np.linspace(self.i_th, self.i_max, 257)
        v = np.polyval(self.vel_coeffs[::-1], grid)
        if np.any(v < -1e-9) or np.any(np.diff(v) < -1e-9):
            raise DeviceParamError(
                "velocity polynomial must be non-negative and non-decreasing on [i_th, i_max]"
            )

    @property
    def delta(self) -> float:
        """Fraction of the free layer occupied by the wall."""
        return self.dw_width / self.l_fl

    def replace(self, **changes) -> "DeviceParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DwState:
    q_norm: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.q_norm <= 1.0:
            raise ValueError(f"q_norm={self.q_norm} outside [0, 1]")


def dw_velocity(i_write, p: DeviceParams):
    """Wall velocity (m/s) for a positive-direction write current (uA).

    Zero below the depinning threshold, the quadratic fit inside
    [i_th, i_max], and the value at i_max beyond it.
    """
    i = np.asarray(i_write, dtype=float)
    if np.any(i < 0):
        raise ValueError("negative write current; use reset() for the T2->T1 pulse")
    i_eff = np.minimum(i, p.i_max)
    v = np.polyval(p.vel_coeffs[::-1], i_eff)
    v = np.where(i < p.i_th, 0.0, np.maximum(v, 0.0))
    return float(v) if v.ndim == 0 else v


def step(s: DwState, i_write: float, dt: float, p: DeviceParams) -> DwState:
    """Advance the wall by one write pulse, pinning silently at both edges."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    v = dw_velocity(i_write, p)
    if v == 0.0:
        return s
    q = s.q_norm + v * dt / (p.l_fl * NM)
    return DwState(min(max(q, 0.0), 1.0))


def reset(s: DwState | None = None) -> DwState:
    """Long negative-direction pulse: the wall ends at the left edge."""
    return DwState(0.0)


def tmr(v_bias, p: DeviceParams):
    return p.tmr0 / (1.0 + (np.asarray(v_bias, dtype=float) / p.v_half) ** 2)


def resistance(q_norm, v_bias, p: DeviceParams):
    """Effective read resistance (ohm) including the heavy-metal series term.

    P region, AP region and the wall slice conduct in parallel; only the AP
    branch depends on bias.  Accepts scalars or broadcastable arrays.
    """
    q = np.asarray(q_norm, dtype=float)
    if np.any((q < 0) | (q > 1)) or np.any(np.isnan(q)):
        raise ValueError("q_norm outside [0, 1]")
    d = p.delta
    r_ap = p.r_p0 * (1.0 + tmr(v_bias, p))
    g = (1.0 - q) * (1.0 - d) / p.r_p0 + q * (1.0 - d) / r_ap + d / p.r_n0
    r = 1.0 / g + p.r_hm
    return float(r) if np.ndim(r) == 0 else r


class Programmed(NamedTuple):
    state: DwState
    current_ua: float
    duration_s: float


def program_position(target_q: float, p: DeviceParams, duration: float | None = None) -> Programmed:
    """Set the wall to ``target_q`` and report a pulse that would get it there from q=0.

    The pulse is found by inverting the velocity model for the current that
    covers the distance in ``duration`` (default: the time a full-range sweep
    takes at the top of the fitted range).  Targets beyond reach at i_max are
    realized with a longer pulse at i_max.
    """
    if not 0.0 <= target_q <= 1.0:
        raise ValueError(f"target position {target_q} outside [0, 1]")
    if target_q == 0.0:
        return Programmed(DwState(0.0), 0.0, 0.0)
    dist = target_q * p.l_fl * NM
    v_top = dw_velocity(p.i_max, p)
    if duration is None:
        duration = p.l_fl * NM / v_top
    if dist > v_top * duration:
        i_w, t = p.i_max, dist / v_top
    else:
        i_lo = np.nextafter(p.i_th, np.inf)
        f = lambda i: dw_velocity(i, p) * duration - dist
        if f(i_lo) >= 0:
            i_w, t = i_lo, dist / dw_velocity(i_lo, p)
        else:
            i_w, t = brentq(f, i_lo, p.i_max, xtol=1e-12, rtol=1e-14), duration
    logger.debug("program q=%.4f via %.4f uA for %.3e s", target_q, i_w, t)
    return Programmed(DwState(float(target_q)), float(i_w), float(t))


def fit_velocity(currents, velocities, degree: int = 2):
    """Least-squares polynomial fit of velocity samples.

    Returns ``(coeffs, rmse)`` with coefficients in ascending order.
    """
    i = np.asarray(currents, dtype=float)
    v = np.asarray(velocities, dtype=float)
    coeffs = np.polynomial.polynomial.polyfit(i, v, degree)
    resid = v - np.polynomial.polynomial.polyval(i, coeffs)
    return coeffs, float(np.sqrt(np.mean(resid**2)))


# --- configuration file -----------------------------------------------------

_FLOAT_FIELDS = [f.name for f in dataclasses.fields(DeviceParams) if f.name != "vel_coeffs"]


def params_from_mapping(values: dict) -> DeviceParams:
    kwargs = {}
    for key, raw in values.items():
        if key == "vel_coeffs":
            parts = raw.replace(",", " ").split() if isinstance(raw, str) else raw
            kwargs[key] = tuple(float(x) for x in parts)
        elif key in _FLOAT_FIELDS:
            kwargs[key] = float(raw)
        else:
            raise DeviceParamError(f"unknown device parameter '{key}'")
    return DeviceParams(**kwargs)


def load_params(path: str | Path) -> DeviceParams:
    """Read the ``[device]`` section of an INI-style config; missing keys keep defaults."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    if not cp.has_section("device"):
        return DeviceParams()
    return params_from_mapping(dict(cp.items("device")))


def params_to_mapping(p: DeviceParams) -> dict[str, str]:
    out = {}
    for f in dataclasses.fields(p):
        val = getattr(p, f.name)
        out[f.name] = " ".join(repr(c) for c in val) if f.name == "vel_coeffs" else repr(val)
    return out
