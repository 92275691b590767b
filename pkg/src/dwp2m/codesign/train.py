"""Training, evaluation, constrained retraining and noise sweeps for :class:`SmallNet`."""

from __future__ import annotations

import copy
import json
import logging
import math
import zipfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np
import torch
import torch.nn.functional as F

from ..fitting import FitModel
from .data import Dataset
from .net import DTYPE, SmallNet

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA = "dwp2m.checkpoint/1"
RETRAIN_MODES = ("none", "freeze_first", "full")


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.002
    momentum: float = 0.9
    batch_size: int = 32
    surrogate_width: float = 1.0
    noise_scale: float = 0.0
    lambda_bw: float = 0.0
    tunability_rho: float = 0.35
    channels: int = 8
    hidden: int = 64
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if not 0.0 <= self.tunability_rho <= 1.0:
            raise ValueError("tunability_rho must lie in [0, 1]")
        if self.batch_size < 1 or self.channels < 1 or self.hidden < 1:
            raise ValueError("batch_size, channels and hidden must be positive")

    def replace(self, **kw) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **kw})


def _mix(*keys) -> int:
    """Deterministic 63-bit seed from integer keys."""
    h = 0x243F6A8885A308D3
    for k in keys:
        h = (h ^ (int(k) & 0xFFFFFFFFFFFFFFFF)) * 0x100000001B3 & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 29
    return h & 0x7FFFFFFFFFFFFFFF


def build_net(fit: FitModel, cfg: TrainConfig, size: int = 16, classes: int = 4) -> SmallNet:
    torch.manual_seed(cfg.seed)
    return SmallNet(fit, size=size, channels=cfg.channels, hidden=cfg.hidden, classes=classes, seed=cfg.seed)


class Step(NamedTuple):
    loss: float
    scores: torch.Tensor
    layer1_spikes: torch.Tensor


def backward_step(net: SmallNet, opt: torch.optim.Optimizer, counts, labels, cfg: TrainConfig,
                  generator=None) -> Step:
    """One optimizer step: spike-count cross-entropy plus lambda_bw x mean layer-1 spike rate."""
    if len(labels) == 0:
        raise ValueError("empty batch")
    opt.zero_grad()
    scores, s1, _ = net(counts, cfg.noise_scale, generator, cfg.surrogate_width)
    ce = F.cross_entropy(scores, torch.as_tensor(labels))
    bw = s1.mean()
    loss = ce + cfg.lambda_bw * bw
    if not torch.isfinite(loss):
        raise TrainingError(f"non-finite loss (cross-entropy {ce.item()}, layer-1 rate {bw.item()})")
    loss.backward()
    opt.step()
    net.clamp_()
    return Step(float(loss.item()), scores.detach(), s1.detach())


THR_LR_FACTOR = 0.01


def make_optimizer(net: SmallNet, params, cfg: TrainConfig):
    """Momentum SGD; thresholds live on a ~0.05-wide voltage scale and get a smaller step."""
    ids = {id(p) for p in params}
    thr = [p for p in (net.thr1,) if id(p) in ids]
    rest = [p for p in params if p is not net.thr1]
    groups = [{"params": rest}]
    if thr:
        groups.append({"params": thr, "lr": cfg.learning_rate * THR_LR_FACTOR})
    return torch.optim.SGD(groups, lr=cfg.learning_rate, momentum=cfg.momentum)


@dataclass
class EpochLog:
    epoch: int
    loss: float
    train_acc: float
    layer1_rate: float


@dataclass
class TrainResult:
    net: SmallNet
    history: list = field(default_factory=list)


def train(net: SmallNet, data: Dataset, cfg: TrainConfig, trainable=None, fabricated=None,
          rho: float | None = None, on_step=None) -> TrainResult:
    """Momentum SGD on spike-count cross-entropy.

    ``trainable`` restricts the parameter set; with ``fabricated`` given,
    layer-1 weights are projected back into the tunable band after every step.
    ``on_step(net)`` is called after each completed step.
    """
    params = list(net.parameters()) if trainable is None else list(trainable)
    opt = make_optimizer(net, params, cfg)
    n = len(data)
    hist = []
    for ep in range(cfg.epochs):
        order = np.random.default_rng(_mix(cfg.seed, ep, 17)).permutation(n)
        tot, correct, rate, nb = 0.0, 0, 0.0, 0
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            g = torch.Generator().manual_seed(_mix(cfg.seed, ep, bi, 23))
            counts, labels = data.counts[idx], data.labels[idx]
            try:
                st = backward_step(net, opt, counts, labels, cfg, g)
            except TrainingError as exc:
                raise TrainingError(f"epoch {ep} batch {bi}: {exc}") from None
            if fabricated is not None:
                project_weights(net, fabricated, cfg.tunability_rho if rho is None else rho)
            if on_step is not None:
                on_step(net)
            tot += st.loss * len(idx)
            correct += int((st.scores.argmax(1).numpy() == labels).sum())
            rate += float(st.layer1_spikes.mean()) * len(idx)
            nb += len(idx)
        log = EpochLog(ep, tot / nb, correct / nb, rate / nb)
        logger.info("epoch %d loss %.4f acc %.3f l1 rate %.4f", ep, log.loss, log.train_acc, log.layer1_rate)
        hist.append(log)
    return TrainResult(net, hist)


@torch.no_grad()
def evaluate(net: SmallNet, data: Dataset, noise_scale: float = 0.0, seed: int = 0, batch_size: int = 100):
    """(accuracy, mean layer-1 spikes per sample); noise keyed on (seed, batch)."""
    correct, l1 = 0, 0.0
    for bi, start in enumerate(range(0, len(data), batch_size)):
        sl = slice(start, start + batch_size)
        g = torch.Generator().manual_seed(_mix(seed, bi, 31))
        scores, s1, _ = net(data.counts[sl], noise_scale, g)
        correct += int((scores.argmax(1).numpy() == data.labels[sl]).sum())
        l1 += float(s1.sum().item())
    return correct / len(data), l1 / len(data)


def noise_sensitivity(net: SmallNet, data: Dataset, noise_scales=(0.0, 0.1, 0.2, 0.4), seed: int = 0):
    return [(float(s), evaluate(net, data, s, seed)[0]) for s in noise_scales]


# --- tunability-constrained retraining ----------------------------------------------------

def project_weights(net: SmallNet, fabricated, rho: float) -> SmallNet:
    """Clamp layer-1 weights into [w_fab - rho/2, w_fab + rho/2] and [-1, 1]."""
    fab = torch.as_tensor(np.asarray(fabricated), dtype=DTYPE)
    if fab.shape != net.w1.shape:
        raise ValueError(f"snapshot shape {tuple(fab.shape)} does not match layer 1 {tuple(net.w1.shape)}")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    with torch.no_grad():
        lo = torch.clamp(_band_edge(fab, -rho / 2), min=-1.0)
        hi = torch.clamp(_band_edge(fab, rho / 2), max=1.0)
        net.w1.copy_(torch.minimum(torch.maximum(net.w1, lo), hi))
    return net


def _band_edge(fab: torch.Tensor, half: float) -> torch.Tensor:
    """fab + half, nudged inward where rounding would put it past |half|."""
    edge = fab + half
    toward = torch.full_like(fab, -math.inf if half > 0 else math.inf)
    for _ in range(4):
        over = (edge - fab).abs() > abs(half)
        if not over.any():
            break
        edge = torch.where(over, torch.nextafter(edge, toward), edge)
    return edge


def retrain_flow(net_a: SmallNet, train_b: Dataset, test_b: Dataset, mode: str, cfg: TrainConfig, on_step=None):
    """Adapt a network trained on task A to task B; returns (accuracy on B, adapted net).

    ``none`` evaluates as is; ``freeze_first`` retrains everything but layer 1
    (weights and thresholds); ``full`` also retrains the layer-1 weights,
    held inside the tunable band around their fabricated values.  Layer-1
    thresholds stay fabricated in both retraining modes.
    """
    if mode not in RETRAIN_MODES:
        raise ValueError(f"mode must be one of {RETRAIN_MODES}")
    net = copy.deepcopy(net_a)
    if mode == "freeze_first":
        params = [p for n, p in net.named_parameters() if n not in ("w1", "thr1")]
        train(net, train_b, cfg, trainable=params, on_step=on_step)
    elif mode == "full":
        params = [p for n, p in net.named_parameters() if n != "thr1"]
        train(net, train_b, cfg, trainable=params, fabricated=net.layer1_numpy()[0], on_step=on_step)
    acc, _ = evaluate(net, test_b, 0.0, cfg.seed)
    return acc, net


# --- gradient check --------------------------------------------------------------------

def smooth_preactivation(net: SmallNet, counts) -> torch.Tensor:
    """Sum of window-end readouts with thresholds and resets bypassed."""
    return net.layer1(counts, smooth=True).sum()


def gradient_check(net: SmallNet, counts, n_params: int = 20, seed: int = 0, h: float = 1e-6):
    """Compare autograd and central differences of :func:`smooth_preactivation`
    w.r.t. randomly chosen layer-1 weights.  Returns (analytic, numeric, index)."""
    rng = np.random.default_rng(seed)
    net.zero_grad()
    smooth_preactivation(net, counts).backward()
    grad = net.w1.grad.detach().clone().reshape(-1)
    flat = net.w1.data.view(-1)
    knee = net.curves.knee
    a = flat.abs().numpy()
    ok = np.nonzero((np.abs(a - knee) > 10 * h) & (a > 10 * h) & (a < 1 - 10 * h))[0]
    picks = rng.choice(ok, size=min(n_params, ok.size), replace=False)
    num = []
    with torch.no_grad():
        for i in picks:
            w0 = flat[i].item()
            flat[i] = w0 + h
            fp = smooth_preactivation(net, counts).item()
            flat[i] = w0 - h
            fm = smooth_preactivation(net, counts).item()
            flat[i] = w0
            num.append((fp - fm) / (2 * h))
    return grad[picks].numpy(), np.array(num), picks


# --- checkpoints --------------------------------------------------------------------------

def save_checkpoint(net: SmallNet, cfg: TrainConfig, path: str | Path, extra: dict | None = None) -> None:
    """Writes ``<path>.json`` (config, architecture, fit model) and ``<path>.npz`` (weights)."""
    path = Path(path)
    meta = {
        "schema": CHECKPOINT_SCHEMA,
        "config": asdict(cfg),
        "arch": {"size": net.size, "channels": net.channels, "hidden": net.fc2.out_features,
                 "classes": net.fc3.out_features, "beta": net.beta},
        "fit": json.loads(net.curves.fit.to_json()),
        "extra": extra or {},
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    write_npz(path.with_suffix(".npz"), {k: v.detach().numpy() for k, v in net.state_dict().items()})


def write_npz(path: str | Path, arrays: dict) -> None:
    """Like ``np.savez`` but with fixed zip timestamps, so equal arrays give equal bytes."""
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w") as fh:
                np.lib.format.write_array(fh, np.asarray(arrays[name]), allow_pickle=False)


def load_checkpoint(path: str | Path) -> tuple[SmallNet, TrainConfig, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    if meta.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema {meta.get('schema')!r}")
    fit = FitModel.from_json(json.dumps(meta["fit"]))
    cfg = TrainConfig(**meta["config"])
    a = meta["arch"]
    net = SmallNet(fit, size=a["size"], channels=a["channels"], hidden=a["hidden"], classes=a["classes"],
                   beta=a["beta"])
    with np.load(path.with_suffix(".npz")) as z:
        net.load_state_dict({k: torch.from_numpy(z[k]) for k in z.files})
    return net, cfg, meta.get("extra", {})
