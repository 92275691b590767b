"""Drive every stochastic CLI command into a directory, for rerun comparisons."""

import json
from pathlib import Path

import numpy as np

from dwp2m.cli import main
from dwp2m.codesign.data import moving_shape_events
from dwp2m.events import emit_csv

CHANNEL_INI = "[channel]\nkind = hybrid\nweights = 0.9 -0.3 0.6 0.8 -0.5 0.7 -0.4 0.5 1.0\nthr = 0.2 0.8\n"
EVENTS_CSV = "t_us,pixel\n" + "".join(f"{37 * k},{k % 9}\n" for k in range(27))


def write_inputs(d: Path) -> dict:
    d.mkdir(parents=True, exist_ok=True)
    (d / "channel.ini").write_text(CHANNEL_INI)
    (d / "events.csv").write_text(EVENTS_CSV)
    stream = moving_shape_events(np.random.default_rng(0), 45.0, 135.0, 4.0, 0.75, 1.5)
    (d / "stream.csv").write_text(emit_csv(stream))
    rng = np.random.default_rng(1)
    np.savez(d / "layer.npz", weights=rng.uniform(-1, 1, (4, 2, 3, 3)), thresholds=np.full(4, 0.47))
    return {k: str(d / k) for k in ("channel.ini", "events.csv", "stream.csv", "layer.npz")}


def run_stochastic(root: Path, seed: int = 3, epochs: int = 1) -> dict:
    """Run each seeded command once under ``root``; returns {command: exit code}."""
    inp = write_inputs(root / "inputs")
    o = lambda name: str(root / name)
    codes = {}
    codes["mc-run"] = main(["mc-run", "--seed", str(seed), "--trials", "200", "--out", o("mc")])
    codes["fit"] = main(["fit", "--seed", str(seed), "--trials", "200", "--out", o("fit")])
    codes["fit-from-sweeps"] = main(["fit", "--f1-sweep", o("mc/f1_sweep.csv"), "--f2-sweep", o("mc/f2_sweep.csv"),
                                     "--out", o("fit2")])
    codes["channel-replay"] = main(["channel-replay", "--seed", str(seed), "--trial", "5", "--channel",
                                    inp["channel.ini"], "--events", inp["events.csv"], "--out", o("replay")])
    codes["infer"] = main(["infer", "--seed", str(seed), "--noise", "on", "--fit", o("fit/fit_model.json"),
                           "--weights", inp["layer.npz"], "--input", inp["stream.csv"], "--out", o("infer/spikes.csv")])
    codes["train"] = main(["train", "--seed", str(seed), "--epochs", str(epochs), "--noise-scale", "0.1",
                           "--fit", o("fit/fit_model.json"), "--out", o("train")])
    codes["retrain"] = main(["retrain", "--seed", str(seed), "--epochs", str(epochs), "--data-seed", "1",
                             "--checkpoint", o("train/model"), "--mode", "full", "--out", o("retrain")])
    codes["noise-sweep"] = main(["noise-sweep", "--seed", str(seed), "--checkpoint", o("train/model"),
                                 "--scales", "0,0.4", "--out", o("noise")])
    return codes


def output_files(root: Path) -> dict:
    """Relative path -> bytes for every output; manifests lose their wall time."""
    out = {}
    for f in sorted(root.rglob("*")):
        if not f.is_file() or f.parts[len(root.parts)] == "inputs":
            continue
        rel = str(f.relative_to(root))
        if f.name == "manifest.json":
            m = json.loads(f.read_text())
            assert isinstance(m.pop("wall_time_s"), float)
            m["argv"] = [a.replace(str(root), "<root>") for a in m["argv"]]
            for k in ("inputs", "outputs"):
                m[k] = [a.replace(str(root), "<root>") for a in m[k]]
            out[rel] = json.dumps(m, sort_keys=True).encode()
        else:
            out[rel] = f.read_bytes()
    return out
