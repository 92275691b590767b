"""Seedable process-variation sampling for Monte Carlo sweeps.

Every random number is a pure function of ``(master_seed, trial_index,
field_tag)``: a SplitMix64 hash of the key is turned into a uniform and then
into a standard normal by the inverse CDF.  There is no generator state, so
trials can be evaluated in any order or in parallel with identical results.
"""

from __future__ import annotations

import configparser
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

FACTOR_LO, FACTOR_HI = 0.1, 1.9

# field -> (hash tag, which sigma drives it)
FIELDS = {
    "m_tx": (1, "sigma_tx"),
    "m_r_weight": (2, "sigma_r"),
    "m_r_acc_pos": (3, "sigma_r"),
    "m_r_acc_neg": (4, "sigma_r"),
    "m_r_thr1": (5, "sigma_r"),
    "m_r_thr2": (6, "sigma_r"),
    "m_jitter": (7, "sigma_jitter"),
}

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def keyed_uniform(*keys):
    """Uniform in (0, 1) keyed on integer keys (scalars or broadcastable arrays)."""
    h = np.uint64(0x6A09E667F3BCC909)
    for k in keys:
        k = np.asarray(k, dtype=np.int64).astype(np.uint64)
        h = _splitmix64(h ^ _splitmix64(k))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0**53


def keyed_normal(*keys):
    """Standard normal keyed on integer keys; see :func:`keyed_uniform`."""
    return ndtri(keyed_uniform(*keys))


@dataclass(frozen=True)
class VariationSpec:
    sigma_tx: float = 0.05
    sigma_r: float = 0.2 / 3
    sigma_jitter: float = 0.1
    trials: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if min(self.sigma_tx, self.sigma_r, self.sigma_jitter) < 0:
            raise ValueError("sigmas must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**63:
            raise ValueError("master_seed must fit in 63 bits")

    @classmethod
    def off(cls, trials: int = 1, master_seed: int = 0) -> "VariationSpec":
        return cls(0.0, 0.0, 0.0, trials, master_seed)


@dataclass(frozen=True)
class VariationSample:
    m_tx: float = 1.0
    m_r_weight: float = 1.0
    m_r_acc_pos: float = 1.0
    m_r_acc_neg: float = 1.0
    m_r_thr1: float = 1.0
    m_r_thr2: float = 1.0
    m_jitter: float = 1.0
    trial_index: int = 0


NOMINAL = VariationSample()


def _factors(spec: VariationSpec, trials) -> dict[str, np.ndarray]:
    out = {}
    for name, (tag, sigma_name) in FIELDS.items():
        sigma = getattr(spec, sigma_name)
        if sigma == 0.0:
            out[name] = np.ones(np.shape(trials))
            continue
        z = keyed_normal(spec.master_seed, trials, tag)
        out[name] = np.clip(1.0 + sigma * z, FACTOR_LO, FACTOR_HI)
    return out


def sample(spec: VariationSpec, trial_index: int) -> VariationSample:
    """Multiplicative variation factors for one trial."""
    if not 0 <= trial_index < spec.trials:
        raise IndexError(f"trial_index {trial_index} outside [0, {spec.trials})")
    f = _factors(spec, trial_index)
    return VariationSample(**{k: float(v) for k, v in f.items()}, trial_index=int(trial_index))


def sample_batch(spec: VariationSpec, trial_indices: Sequence[int] | None = None) -> dict[str, np.ndarray]:
    """Vectorized :func:`sample`: one array per factor, same values as the scalar path."""
    t = np.arange(spec.trials) if trial_indices is None else np.asarray(trial_indices)
    if t.size and (t.min() < 0 or t.max() >= spec.trials):
        raise IndexError("trial index out of range")
    out = _factors(spec, t)
    out["trial_index"] = t
    return out


class TrialError(RuntimeError):
    def __init__(self, trial_index: int, cause: BaseException):
        super().__init__(f"trial {trial_index} failed: {cause!r}")
        self.trial_index = trial_index


def run_trials(spec: VariationSpec, closure: Callable[[int], object], workers: int = 1) -> list:
    """Evaluate ``closure(trial_index)`` for every trial, returned in trial order.

    The first failing trial (lowest index) is re-raised as :class:`TrialError`.
    """

    def guarded(t):
        try:
            return closure(t)
        except Exception as exc:
            raise TrialError(t, exc) from exc

    if workers <= 1:
        return [guarded(t) for t in range(spec.trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, range(spec.trials)))


def load_spec(path: str | Path, **overrides) -> VariationSpec:
    """Read the ``[variation]`` section of an INI config."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    kw = {}
    if cp.has_section("variation"):
        names = {f.name: f.type for f in fields(VariationSpec)}
        for key, raw in cp.items("variation"):
            if key not in names:
                raise ValueError(f"unknown variation parameter '{key}'")
            kw[key] = int(raw) if key in ("trials", "master_seed") else float(raw)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return VariationSpec(**kw)
