"""Behavioral transfer functions extracted from Monte Carlo sweeps.

f1 maps the normalized input x weight of one event to the normalized wall
displacement it causes; f2 maps the accumulator position difference to the
normalized pre-activation voltage.  Both are fitted as polynomials to per-bin
means, with per-bin standard deviations kept for noise injection and a
low-quantile envelope of f2 used as the worst-case readout.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .device import NM, DeviceParams, dw_velocity
from .montecarlo import VariationSpec, sample_batch
from .pixel import CONFIG_TAGS, branch_current, clamp_current, divider_voltage, mdw_position_for

SCHEMA = "dwp2m.fitmodel/1"
N_BINS = 32
F1_GRID = np.linspace(0.0, 1.0, N_BINS + 1)
Q_GRID = np.linspace(0.0, 1.0, N_BINS // 2 + 1)


class FitError(ValueError):
    pass


class Scatter(NamedTuple):
    x: np.ndarray
    trial: np.ndarray
    y: np.ndarray


class Fit(NamedTuple):
    coeffs: np.ndarray
    rmse: float


# --- f1 ---------------------------------------------------------------------------

def _displacement(i_ua, jitter, p: DeviceParams):
    """Wall displacement (q units) of one pulse starting from the left edge."""
    return dw_velocity(i_ua, p) * p.t_pulse * jitter / (p.l_fl * NM)


def f1_normalization(kind: str, p: DeviceParams, d_hybrid: float = 0.5) -> tuple[float, float]:
    """(offset, full dynamic range) of one-event displacement, in q units.

    The range spans the configuration's whole reachable current window: CMOS
    and hybrid from zero up to their strongest setting (hybrid with its MTJ
    fully parallel), MTJ-only from the AP to the P weight state.
    """
    if kind == "cmos":
        return 0.0, float(_displacement(clamp_current(p.i_unit, p), 1.0, p))
    if kind == "mdw":
        lo = _displacement(clamp_current(branch_current("mdw", 1.0, 1.0, 1.0, 1.0, p), p), 1.0, p)
        hi = _displacement(clamp_current(branch_current("mdw", 1.0, 0.0, 1.0, 1.0, p), p), 1.0, p)
        return float(lo), float(hi - lo)
    if kind == "hybrid":
        hi = _displacement(clamp_current(branch_current("hybrid", 1.0, 0.0, 1.0, 1.0, p), p), 1.0, p)
        return 0.0, float(hi)
    raise ValueError(f"unknown configuration '{kind}'")


def f1_knee(kind: str, p: DeviceParams, d_hybrid: float = 0.5) -> float:
    """Smallest x whose nominal write current reaches the depinning threshold."""
    if kind == "mdw":
        lo = branch_current("mdw", 1.0, 1.0, 1.0, 1.0, p)
        if lo >= p.i_th:
            return 0.0
        return float(brentq(lambda x: branch_current("mdw", 1.0, mdw_position_for(x, p), 1.0, 1.0, p)
                            - p.i_th, 0.0, 1.0))
    f = lambda x: float(branch_current(kind, x, d_hybrid, 1.0, 1.0, p)) - p.i_th
    if f(1.0) < 0:
        raise ValueError(f"{kind} weights never reach the depinning threshold")
    return float(brentq(f, 1e-12, 1.0, xtol=1e-14))


def sweep_f1(config_tag: str, grid=F1_GRID, spec: VariationSpec = VariationSpec(),
             p: DeviceParams = DeviceParams(), d_hybrid: float = 0.5) -> Scatter:
    """One event per (grid point, trial); returns normalized displacements.

    x = 0 means no event (zero input or zero weight) and yields exactly 0.
    """
    if config_tag not in CONFIG_TAGS:
        raise ValueError(f"unknown configuration '{config_tag}'")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or grid.min() < 0 or grid.max() > 1:
        raise ValueError("f1 grid must lie in [0, 1]")
    f = sample_batch(spec)
    offset, dr = f1_normalization(config_tag, p, d_hybrid)
    xs, ts, ys = [], [], []
    for x in grid:
        if x == 0.0:
            y = np.zeros(spec.trials)
        else:
            if config_tag == "cmos":
                i = branch_current("cmos", x, 0.0, f["m_tx"], f["m_r_weight"], p)
            elif config_tag == "mdw":
                i = branch_current("mdw", 1.0, mdw_position_for(x, p), f["m_tx"], f["m_r_weight"], p)
            else:
                i = branch_current("hybrid", x, d_hybrid, f["m_tx"], f["m_r_weight"], p)
            y = (_displacement(clamp_current(i, p), f["m_jitter"], p) - offset) / dr
        xs.append(np.full(spec.trials, x))
        ts.append(f["trial_index"])
        ys.append(y)
    return Scatter(np.concatenate(xs), np.concatenate(ts), np.concatenate(ys))


# --- f2 ---------------------------------------------------------------------------

def sweep_f2(q_grid=Q_GRID, spec: VariationSpec = VariationSpec(), p: DeviceParams = DeviceParams()) -> Scatter:
    """Normalized pre-activation for every (q_pos, q_neg) pair on the grid and every trial.

    x holds q_pos - q_neg; many pairs share one difference, which is where
    the readout nonlinearity shows up as spread.
    """
    q = np.asarray(q_grid, dtype=float)
    f = sample_batch(spec)
    qp, qn = np.meshgrid(q, q, indexing="ij")
    qp, qn = qp.ravel(), qn.ravel()
    n_pairs, n_tr = qp.size, spec.trials
    qp_full = np.repeat(qp, n_tr)
    qn_full = np.repeat(qn, n_tr)
    mp = np.tile(f["m_r_acc_pos"], n_pairs)
    mn = np.tile(f["m_r_acc_neg"], n_pairs)
    v = divider_voltage(qp_full, qn_full, mp, mn, p) / p.v_read
    diff = np.round(qp_full - qn_full, 12)
    return Scatter(diff, np.tile(f["trial_index"], n_pairs), v)


# --- statistics and fits ------------------------------------------------------------

def bin_stats(sc: Scatter):
    """Per distinct x: (centers, mean, std, count)."""
    centers, inv = np.unique(sc.x, return_inverse=True)
    count = np.bincount(inv)
    mean = np.bincount(inv, weights=sc.y) / count
    var = np.bincount(inv, weights=(sc.y - mean[inv]) ** 2) / count
    return centers, mean, np.sqrt(var), count


def _lstsq(x, y, degree: int, knee: float | None = None) -> Fit:
    if knee is None:
        powers, xs, mask = np.arange(degree + 1), x, np.ones(x.size, bool)
    else:
        powers, xs, mask = np.arange(1, degree + 1), x - knee, x >= knee
    A = xs[mask, None] ** powers[None, :]
    rank = np.linalg.matrix_rank(A) if A.size else 0
    if rank < powers.size:
        raise FitError(f"rank-deficient design matrix (rank {rank} < {powers.size}) on grid {x[mask].tolist()}")
    sol, *_ = np.linalg.lstsq(A, y[mask], rcond=None)
    coeffs = np.zeros(degree + 1)
    coeffs[powers] = sol
    rmse = float(np.sqrt(np.mean((y - _poly(x, coeffs, knee)) ** 2)))
    return Fit(coeffs, rmse)


def _poly(x, coeffs, knee=None):
    if knee is None:
        return P.polyval(x, coeffs)
    return np.where(x >= knee, P.polyval(np.maximum(x - knee, 0.0), coeffs), 0.0)


def fit_curve(sc: Scatter, degree: int = 3, knee: float | None = None) -> Fit:
    """Ordinary least squares on per-bin means; RMSE is against those means.

    With ``knee`` the polynomial is in (x - knee), pinned to zero there, and
    the curve is identically zero below it.
    """
    centers, mean, _, _ = bin_stats(sc)
    n_used = centers.size if knee is None else int(np.sum(centers >= knee))
    if n_used < degree + 1 - (knee is not None):
        raise FitError(f"need at least {degree + 1} distinct x values, got grid {centers.tolist()}")
    return _lstsq(centers, mean, degree, knee)


def lower_envelope(sc: Scatter, quantile: float = 0.01, degree: int = 3) -> Fit:
    """Polynomial through the per-bin empirical ``quantile``, kept below the mean fit."""
    if not 0.0 < quantile <= 0.5:
        raise ValueError("quantile must lie in (0, 0.5]")
    centers, inv = np.unique(sc.x, return_inverse=True)
    count = np.bincount(inv)
    if count.min() < 1.0 / quantile:
        raise FitError(f"{count.min()} trials per bin is too few for quantile {quantile}")
    order = np.argsort(inv, kind="stable")
    groups = np.split(sc.y[order], np.cumsum(count)[:-1])
    qv = np.array([np.quantile(g, quantile) for g in groups])
    env = _lstsq(centers, qv, degree)
    mean_fit = fit_curve(sc, degree)
    excess = np.max(P.polyval(centers, env.coeffs) - P.polyval(centers, mean_fit.coeffs))
    coeffs = env.coeffs.copy()
    if excess > 0:
        coeffs[0] -= excess
    rmse = float(np.sqrt(np.mean((qv - P.polyval(centers, coeffs)) ** 2)))
    return Fit(coeffs, rmse)


def worst_case_spread(sc: Scatter) -> float:
    """Largest per-bin standard deviation; scatters are already normalized to full range."""
    _, _, std, _ = bin_stats(sc)
    return float(std.max())


# --- model ---------------------------------------------------------------------------

@dataclass
class FitModel:
    config_tag: str
    f1_coeffs: list
    f1_noise: dict
    f2_coeffs: list
    f2_lower: list
    f1_knee: float = 0.0
    f2_noise: dict = field(default_factory=dict)
    fit_rmse: dict = field(default_factory=dict)
    dq_scale: float = 1.0
    dq_offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {"schema": SCHEMA, **asdict(self)}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FitModel":
        d = json.loads(text)
        schema = d.pop("schema", None)
        if schema != SCHEMA:
            raise ValueError(f"unsupported fit-model schema {schema!r}")
        return cls(**d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "FitModel":
        return cls.from_json(Path(path).read_text())


def _noise_table(centers, mean, std) -> dict:
    return {"center": centers.tolist(), "mean": mean.tolist(), "std": std.tolist()}


def build_fit_model(config_tag: str = "hybrid", spec: VariationSpec = VariationSpec(),
                    p: DeviceParams = DeviceParams(), degree: int = 3, quantile: float = 0.01,
                    f1_grid=F1_GRID, q_grid=Q_GRID, d_hybrid: float = 0.5) -> FitModel:
    s1 = sweep_f1(config_tag, f1_grid, spec, p, d_hybrid)
    s2 = sweep_f2(q_grid, spec, p)
    knee = f1_knee(config_tag, p, d_hybrid)
    f1 = fit_curve(s1, degree, knee=knee)
    f2 = fit_curve(s2, degree)
    lo = lower_envelope(s2, quantile, degree)
    offset, dr = f1_normalization(config_tag, p, d_hybrid)
    return FitModel(
        config_tag=config_tag,
        f1_coeffs=f1.coeffs.tolist(),
        f1_knee=knee,
        f1_noise=_noise_table(*bin_stats(s1)[:3]),
        f2_coeffs=f2.coeffs.tolist(),
        f2_lower=lo.coeffs.tolist(),
        f2_noise=_noise_table(*bin_stats(s2)[:3]),
        fit_rmse={"f1": f1.rmse, "f2": f2.rmse, "f2_lower": lo.rmse},
        dq_scale=dr,
        dq_offset=offset,
        meta={"degree": degree, "quantile": quantile, "trials": spec.trials,
              "master_seed": spec.master_seed, "d_hybrid": d_hybrid},
    )


def eval_f1(model: FitModel, x):
    """Mean normalized displacement and its std for one event at ``x`` in [0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("f1 argument outside [0, 1]")
    mean = np.maximum(_poly(x, np.asarray(model.f1_coeffs), model.f1_knee), 0.0)
    mean = np.where(x == 0.0, 0.0, mean)
    nt = model.f1_noise
    std = np.interp(x, nt["center"], nt["std"])
    if mean.ndim == 0:
        return float(mean), float(std)
    return mean, std


def eval_f2(model: FitModel, d_diff, mode: str = "mean"):
    """Normalized pre-activation for a position difference in [-1, 1]."""
    d = np.asarray(d_diff, dtype=float)
    if np.any((d < -1) | (d > 1)):
        raise ValueError("f2 argument outside [-1, 1]")
    if mode == "mean":
        c = model.f2_coeffs
    elif mode == "lower":
        c = model.f2_lower
    else:
        raise ValueError("mode must be 'mean' or 'lower'")
    v = np.clip(P.polyval(d, np.asarray(c)), 0.0, 1.0)
    return float(v) if v.ndim == 0 else v


def f1_derivative(model: FitModel, x):
    x = np.asarray(x, dtype=float)
    dc = P.polyder(np.asarray(model.f1_coeffs))
    return np.where(x >= model.f1_knee, P.polyval(np.maximum(x - model.f1_knee, 0.0), dc), 0.0)


def f2_derivative(model: FitModel, d, mode: str = "lower"):
    c = model.f2_lower if mode == "lower" else model.f2_coeffs
    return P.polyval(d, P.polyder(np.asarray(c)))
