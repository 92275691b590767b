"""Synthetic event-camera tasks small enough to train on a laptop CPU.

A bright rectangle slides across a dark 16x16 sensor.  Pixels the rectangle
enters emit ON events, pixels it leaves emit OFF events, plus a little
uniform background noise.  Two tasks with unrelated labels are provided:

* ``bars``: the shape is a thin bar moving perpendicular to itself; the label
  is its orientation (0, 45, 90, 135 degrees).
* ``dots``: a single-pixel dot; the label is its direction of motion
  (right, down, left, up).  Dots drive far fewer events per receptive field
  than bars.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..events import EventStream, window_counts

SIZE = 16
WINDOW_US = 1000
N_WINDOWS = 8
SUBSTEPS = 40
TASKS = ("bars", "dots")
N_CLASSES = 4


@dataclass
class Dataset:
    counts: np.ndarray
    """(samples, windows, 2, H, W) event counts per window and polarity."""
    labels: np.ndarray
    streams: list

    def __len__(self):
        return len(self.labels)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.counts[idx], self.labels[idx], [self.streams[i] for i in idx])


def _render(center, u, n, half_len, half_thick):
    yy, xx = np.mgrid[0:SIZE, 0:SIZE] + 0.5
    dx, dy = xx - center[0], yy - center[1]
    along = dx * u[0] + dy * u[1]
    across = dx * n[0] + dy * n[1]
    return (np.abs(along) <= half_len) & (np.abs(across) <= half_thick)


def moving_shape_events(rng: np.random.Generator, angle_deg: float, direction_deg: float, half_len: float,
                        half_thick: float, speed: float, noise_events: int = 4) -> EventStream:
    """Events of a rectangle (long axis at ``angle_deg``) moving along ``direction_deg``; speed in px/ms."""
    a, d = np.deg2rad(angle_deg), np.deg2rad(direction_deg)
    u = np.array([np.cos(a), np.sin(a)])
    n = np.array([-np.sin(a), np.cos(a)])
    vel = speed * np.array([np.cos(d), np.sin(d)])
    duration = N_WINDOWS * WINDOW_US
    mid = SIZE / 2 + rng.uniform(-2.0, 2.0, size=2)
    ts, xs, ys, ps = [], [], [], []
    prev = None
    dt = duration / SUBSTEPS
    for k in range(SUBSTEPS + 1):
        t = k * dt
        c = mid + vel * (t - duration / 2) / 1000.0
        img = _render(c, u, n, half_len, half_thick)
        if prev is not None:
            for pol, mask in ((1, img & ~prev), (0, prev & ~img)):
                yy, xx = np.nonzero(mask)
                ts.append(np.floor(t - dt + rng.uniform(0, dt, yy.size)).astype(np.int64))
                xs.append(xx), ys.append(yy), ps.append(np.full(yy.size, pol))
        prev = img
    ts.append(rng.integers(0, duration, noise_events))
    xs.append(rng.integers(0, SIZE, noise_events)), ys.append(rng.integers(0, SIZE, noise_events))
    ps.append(rng.integers(0, 2, noise_events))
    t, x, y, p = (np.concatenate(v) for v in (ts, xs, ys, ps))
    order = np.lexsort((p, x, y, t))
    return EventStream(SIZE, SIZE, t[order], x[order], y[order], p[order])


def _sample(task: str, label: int, rng: np.random.Generator) -> EventStream:
    if task == "bars":
        angle = 45.0 * label + rng.uniform(-8, 8)
        direction = angle + 90.0 + 180.0 * rng.integers(0, 2)
        return moving_shape_events(rng, angle, direction, rng.uniform(3.0, 5.0), 0.75, rng.uniform(1.2, 2.0))
    if task == "dots":
        direction = 90.0 * label + rng.uniform(-8, 8)
        return moving_shape_events(rng, 0.0, direction, 0.5, 0.5, rng.uniform(1.2, 2.0))
    raise ValueError(f"unknown task '{task}', expected one of {TASKS}")


def make_dataset(task: str = "bars", n: int = 2000, seed: int = 0) -> Dataset:
    """``n`` samples with balanced labels in a seeded random order."""
    if task not in TASKS:
        raise ValueError(f"unknown task '{task}', expected one of {TASKS}")
    rng = np.random.default_rng([seed, TASKS.index(task)])
    labels = rng.permutation(np.arange(n) % N_CLASSES)
    streams = [_sample(task, int(lab), rng) for lab in labels]
    counts = np.stack([window_counts(s, WINDOW_US, N_WINDOWS) for s in streams]) if streams else \
        np.zeros((0, N_WINDOWS, 2, SIZE, SIZE), np.int64)
    return Dataset(counts, labels.astype(np.int64), streams)


def split(ds: Dataset, test_fraction: float = 0.2) -> tuple[Dataset, Dataset]:
    n_test = int(round(len(ds) * test_fraction))
    idx = np.arange(len(ds))
    return ds.subset(idx[n_test:]), ds.subset(idx[:n_test])
