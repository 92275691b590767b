"""Spiking network whose first layer is the in-pixel analog convolution.

Layer 1 mirrors :func:`dwp2m.events.conv_forward_analog` in torch so it can be
trained: per-event displacements come from the f1 fit, the window-end readout
from the f2 lower envelope, and both are compared against per-channel
thresholds.  Layers 2 and 3 are ordinary leaky integrate-and-fire layers.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..events import output_size
from ..fitting import FitModel

DTYPE = torch.float64
L1_VOLT_SCALE = 0.05
"""Normalized readout volts per surrogate unit in layer 1 (its swing is far below 1)."""


class TriangleSpike(torch.autograd.Function):
    """Heaviside forward; triangular surrogate of half-width ``width`` backward."""

    @staticmethod
    def forward(ctx, x, width):
        ctx.save_for_backward(x)
        ctx.width = width
        return (x >= 0).to(x.dtype)

    @staticmethod
    def backward(ctx, grad):
        (x,) = ctx.saved_tensors
        w = ctx.width
        return grad * torch.clamp(1.0 - x.abs() / w, min=0.0) / w, None


def spike(x, width: float = 1.0):
    return TriangleSpike.apply(x, width)


def _polyval(x, coeffs):
    out = torch.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + c
    return out


class FitCurves:
    """The fitted curves as differentiable torch functions."""

    def __init__(self, fit: FitModel):
        self.fit = fit
        self.knee = float(fit.f1_knee)
        self.f1c = [float(c) for c in fit.f1_coeffs]
        self.f2c = [float(c) for c in fit.f2_lower]
        self.f1_center = torch.tensor(fit.f1_noise["center"], dtype=DTYPE)
        self.f1_std = torch.tensor(fit.f1_noise["std"], dtype=DTYPE)
        nt = fit.f2_noise or {}
        self.f2_center = torch.tensor(nt.get("center", [-1.0, 1.0]), dtype=DTYPE)
        self.f2_std = torch.tensor(nt.get("std", [0.0, 0.0]), dtype=DTYPE)

    def displacement(self, w):
        """Accumulator displacement (q units) of one event through weight ``w``; 0 for w = 0."""
        a = w.abs()
        m = torch.where(a >= self.knee, _polyval(torch.clamp(a - self.knee, min=0.0), self.f1c), torch.zeros_like(a))
        m = torch.clamp(m, min=0.0)
        return torch.where(w != 0, self.fit.dq_offset + m * self.fit.dq_scale, torch.zeros_like(a))

    def displacement_std(self, w):
        a = w.detach().abs()
        s = _interp(a, self.f1_center, self.f1_std) * self.fit.dq_scale
        return torch.where(w != 0, s, torch.zeros_like(s))

    def readout(self, d):
        return torch.clamp(_polyval(d, self.f2c), 0.0, 1.0)

    def readout_std(self, d):
        return _interp(d.detach(), self.f2_center, self.f2_std)


def _interp(x, xp, fp):
    idx = torch.clamp(torch.searchsorted(xp, x.contiguous()), 1, xp.numel() - 1)
    x0, x1 = xp[idx - 1], xp[idx]
    t = torch.clamp((x - x0) / (x1 - x0), 0.0, 1.0)
    return fp[idx - 1] + t * (fp[idx] - fp[idx - 1])


class SmallNet(nn.Module):
    """Analog conv layer (k=3, s=2) -> LIF hidden -> LIF output."""

    def __init__(self, fit: FitModel, size: int = 16, channels: int = 8, hidden: int = 64, classes: int = 4,
                 beta: float = 0.9, thr_init: float = 0.47, seed: int = 0):
        super().__init__()
        if fit is None:
            raise ValueError("a fit model is required")
        g = torch.Generator().manual_seed(seed)
        self.curves = FitCurves(fit)
        self.size, self.channels, self.beta = size, channels, beta
        self.kernel, self.stride = 3, 2
        self.out_hw = output_size(size, 3, 2)
        self.w1 = nn.Parameter(torch.empty(channels, 2, 3, 3, dtype=DTYPE).uniform_(-1, 1, generator=g))
        self.thr1 = nn.Parameter(torch.full((channels,), thr_init, dtype=DTYPE))
        n_in = channels * self.out_hw ** 2
        self.fc2 = nn.Linear(n_in, hidden, dtype=DTYPE)
        self.fc3 = nn.Linear(hidden, classes, dtype=DTYPE)
        for lin in (self.fc2, self.fc3):
            bound = 1.0 / np.sqrt(lin.in_features)
            with torch.no_grad():
                lin.weight.uniform_(-bound, bound, generator=g)
                lin.bias.uniform_(-bound, bound, generator=g)
        with torch.no_grad():
            self.fc2.weight.mul_(4.0)
            self.fc3.weight.mul_(4.0)

    # -- layer 1 --------------------------------------------------------------------

    def layer1_kernels(self):
        w = self.w1
        dq = self.curves.displacement(w)
        zero = torch.zeros_like(dq)
        return torch.where(w > 0, dq, zero), torch.where(w < 0, dq, zero)

    def layer1(self, counts, noise_scale: float = 0.0, generator: torch.Generator | None = None,
               surrogate_width: float = 1.0, smooth: bool = False):
        """Run layer 1 over (B, T, 2, H, W) counts.

        Returns spikes (B, T, C, OH, OW).  With ``smooth`` the readout voltages
        are returned instead and neither thresholds nor resets are applied.
        """
        counts = torch.as_tensor(counts, dtype=DTYPE)
        b, t = counts.shape[:2]
        k_pos, k_neg = self.layer1_kernels()
        if noise_scale > 0:
            sd = self.curves.displacement_std(self.w1)
            v_pos = torch.where(self.w1 > 0, sd, torch.zeros_like(sd)) ** 2
            v_neg = torch.where(self.w1 < 0, sd, torch.zeros_like(sd)) ** 2
        shape = (b, self.channels, self.out_hw, self.out_hw)
        q_pos = counts.new_zeros(shape)
        q_neg = counts.new_zeros(shape)
        outs = []
        for k in range(t):
            x = counts[:, k]
            q_pos = q_pos + F.conv2d(x, k_pos, stride=self.stride)
            q_neg = q_neg + F.conv2d(x, k_neg, stride=self.stride)
            if noise_scale > 0:
                n_pos = torch.sqrt(F.conv2d(x, v_pos, stride=self.stride))
                n_neg = torch.sqrt(F.conv2d(x, v_neg, stride=self.stride))
                q_pos = q_pos + noise_scale * n_pos * torch.randn(shape, generator=generator, dtype=DTYPE)
                q_neg = q_neg + noise_scale * n_neg * torch.randn(shape, generator=generator, dtype=DTYPE)
            q_pos = torch.clamp(q_pos, 0.0, 1.0)
            q_neg = torch.clamp(q_neg, 0.0, 1.0)
            d = q_pos - q_neg
            v = self.curves.readout(d)
            if noise_scale > 0:
                v = v + noise_scale * self.curves.readout_std(d) * torch.randn(shape, generator=generator, dtype=DTYPE)
            if smooth:
                outs.append(v)
                continue
            s = spike(v - self.thr1.view(1, -1, 1, 1), surrogate_width * L1_VOLT_SCALE)
            keep = 1.0 - s.detach()
            q_pos, q_neg = q_pos * keep, q_neg * keep
            outs.append(s)
        return torch.stack(outs, dim=1)

    # -- full network -----------------------------------------------------------------

    def forward(self, counts, noise_scale: float = 0.0, generator: torch.Generator | None = None,
                surrogate_width: float = 1.0):
        """Returns (output spike counts (B, classes), layer-1 spikes, hidden spikes)."""
        s1 = self.layer1(counts, noise_scale, generator, surrogate_width)
        b, t = s1.shape[:2]
        u2 = s1.new_zeros(b, self.fc2.out_features)
        u3 = s1.new_zeros(b, self.fc3.out_features)
        s2_all, s3_sum = [], 0
        for k in range(t):
            u2 = self.beta * u2 + self.fc2(s1[:, k].reshape(b, -1))
            s2 = spike(u2 - 1.0, surrogate_width)
            u2 = u2 * (1.0 - s2.detach())
            u3 = self.beta * u3 + self.fc3(s2)
            s3 = spike(u3 - 1.0, surrogate_width)
            u3 = u3 * (1.0 - s3.detach())
            s2_all.append(s2)
            s3_sum = s3_sum + s3
        return s3_sum, s1, torch.stack(s2_all, dim=1)

    def clamp_(self):
        """Keep layer-1 weights in [-1, 1] and thresholds inside the readout range."""
        with torch.no_grad():
            self.w1.clamp_(-1.0, 1.0)
            self.thr1.clamp_(1e-3, 1.0)

    def layer1_numpy(self):
        return self.w1.detach().numpy().copy(), self.thr1.detach().numpy().copy()
