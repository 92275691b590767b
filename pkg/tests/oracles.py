"""Independent reference implementations used by the tests.

The digital oracle works purely in integers.  With weights n/8, a linear f1,
dq_scale 1/64 and readout 0.5 + 0.5 * diff, one event moves an accumulator by
|n|/512, so accumulators are integers in units of 1/512 and saturate at 512.
A threshold of 0.5 + 0.5 * (m + 0.5) / 512 fires exactly when pos - neg > m.
"""

import numpy as np

from dwp2m.fitting import FitModel

UNIT = 512


def linear_fit(dq_scale=1 / 64, f2=(0.5, 0.5)) -> FitModel:
    """f1(x) = x, affine f2, zero noise; every constant is dyadic."""
    grid = np.linspace(0, 1, 33).tolist()
    return FitModel(
        config_tag="hybrid",
        f1_coeffs=[0.0, 1.0, 0.0, 0.0],
        f1_noise={"center": grid, "mean": grid, "std": [0.0] * 33},
        f2_coeffs=list(f2) + [0.0, 0.0],
        f2_lower=list(f2) + [0.0, 0.0],
        f1_knee=0.0,
        f2_noise={"center": [-1.0, 1.0], "mean": [0.0, 1.0], "std": [0.0, 0.0]},
        dq_scale=dq_scale,
        dq_offset=0.0,
    )


def threshold_for(m):
    """Normalized threshold voltage that fires iff the integer difference exceeds m."""
    return 0.5 + 0.5 * (np.asarray(m, float) + 0.5) / UNIT


def digital_layer(counts, n_weights, m, stride, return_state=False):
    """Brute-force MAC + threshold + reset.

    counts: (windows, 2, H, W) ints; n_weights: (C, 2, k, k) ints in [-8, 8];
    m: (C,) integer thresholds.  Returns fired (windows, C, OH, OW) bools,
    plus the final integer accumulators if ``return_state``.
    """
    n_win, _, h, w = counts.shape
    c, _, k, _ = n_weights.shape
    oh, ow = (h - k) // stride + 1, (w - k) // stride + 1
    pos = np.zeros((c, oh, ow), np.int64)
    neg = np.zeros((c, oh, ow), np.int64)
    fired = np.zeros((n_win, c, oh, ow), bool)
    for t in range(n_win):
        for ci in range(c):
            for oy in range(oh):
                for ox in range(ow):
                    sp = sn = 0
                    for pol in range(2):
                        for ky in range(k):
                            for kx in range(k):
                                n = int(n_weights[ci, pol, ky, kx])
                                cnt = int(counts[t, pol, oy * stride + ky, ox * stride + kx])
                                if n > 0:
                                    sp += cnt * n
                                elif n < 0:
                                    sn += cnt * -n
                    a = min(pos[ci, oy, ox] + sp, UNIT)
                    b = min(neg[ci, oy, ox] + sn, UNIT)
                    if a - b > m[ci]:
                        fired[t, ci, oy, ox] = True
                        a = b = 0
                    pos[ci, oy, ox], neg[ci, oy, ox] = a, b
    if return_state:
        return fired, pos, neg
    return fired
