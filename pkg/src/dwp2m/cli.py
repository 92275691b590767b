"""Command-line entry point: ``dwp2m <command> [options]``.

Exit codes: 0 success, 1 user error (bad flags, config or input), 2 internal
invariant violation.  Every command writes a ``manifest.json`` next to its
outputs; stochastic commands refuse to run without ``--seed``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import difflib
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .device import DeviceParamError, DeviceParams, dw_velocity, params_from_mapping, resistance
from .events import EventFormatError, LayerConfig, bandwidth, conv_forward_analog, emit_csv, parse_csv, parse_nmnist
from .fitting import (F1_GRID, Q_GRID, FitError, FitModel, Scatter, bin_stats, build_fit_model, eval_f1, eval_f2,
                      fit_curve, f1_knee, f1_normalization, lower_envelope, sweep_f1, sweep_f2)
from .metrics import EnergyConstants, LayerCounts, RunSummary, energy, parse_report_csv, report_csv, report_text
from .montecarlo import VariationSpec, sample_batch
from .pixel import CONFIG_TAGS, ConvergenceError, FabricationGuardError, branch_current, clamp_current, divider_voltage

logger = logging.getLogger("dwp2m")


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UserError(f"{self.prog}: {message}")


# --- helpers ---------------------------------------------------------------------------

def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path is not None:
        if not Path(path).is_file():
            raise UserError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise UserError(f"cannot parse config {path}: {exc}") from None
    return cp


def _device(cp) -> DeviceParams:
    if not cp.has_section("device"):
        return DeviceParams()
    return params_from_mapping(dict(cp.items("device")))


def _variation(cp, seed=None, trials=None) -> VariationSpec:
    kw = {}
    if cp.has_section("variation"):
        for k, raw in cp.items("variation"):
            if k not in ("sigma_tx", "sigma_r", "sigma_jitter", "trials", "master_seed"):
                raise UserError(f"unknown [variation] key '{k}'")
            kw[k] = int(raw) if k in ("trials", "master_seed") else float(raw)
    if seed is not None:
        kw["master_seed"] = seed
    if trials is not None:
        kw["trials"] = trials
    return VariationSpec(**kw)


def _need_seed(args):
    if args.seed is None:
        raise UserError(f"'{args.command}' is stochastic and needs --seed N")


def _load_fit(path) -> FitModel:
    p = Path(path)
    if not p.is_file():
        raise UserError(f"fit model file not found: {p}")
    try:
        return FitModel.load(p)
    except (ValueError, KeyError, TypeError) as exc:
        raise UserError(f"cannot read fit model {p}: {exc}") from None


class Run:
    """Collects outputs of one command and writes the manifest beside them."""

    def __init__(self, args, out_dir: Path):
        self.args, self.out_dir, self.outputs = args, Path(out_dir), []
        self.t0 = time.monotonic()

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        _write_atomic(path, text)
        self.outputs.append(str(path))
        return path

    def finish(self, inputs=()):
        a = self.args
        manifest = {
            "command": a.command,
            "config": getattr(a, "config", None),
            "seed": getattr(a, "seed", None),
            "inputs": [str(i) for i in inputs if i is not None],
            "outputs": self.outputs,
            "argv": a.argv,
            "tool_version": __version__,
            "wall_time_s": round(time.monotonic() - self.t0, 3),
        }
        _write_atomic(self.out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")


# --- commands --------------------------------------------------------------------------

def cmd_device_sweep(args):
    p = _device(_read_config(args.config))
    run = Run(args, args.out)
    rows = []
    for v in np.linspace(0.0, args.v_max, args.n_bias):
        for q in np.linspace(0.0, 1.0, args.n_q):
            rows.append((q, v, resistance(q, v, p)))
    run.write("resistance.csv", _csv_text(["q_norm", "v_bias", "resistance_ohm"], rows))
    i = np.linspace(0.0, p.i_max, args.n_current)
    run.write("velocity.csv", _csv_text(["i_write_ua", "velocity_mps"], zip(i, dw_velocity(i, p))))
    run.finish([args.config])


def cmd_mc_run(args):
    _need_seed(args)
    cp = _read_config(args.config)
    p, spec = _device(cp), _variation(cp, args.seed, args.trials)
    f = sample_batch(spec)
    kind, x = args.kind, args.weight
    if kind == "mdw":
        from .pixel import mdw_position_for
        i = branch_current("mdw", 1.0, mdw_position_for(x, p), f["m_tx"], f["m_r_weight"], p)
    else:
        i = branch_current(kind, x, 0.5, f["m_tx"], f["m_r_weight"], p)
    i = clamp_current(i, p)
    dq = dw_velocity(i, p) * p.t_pulse * f["m_jitter"] / (p.l_fl * 1e-9)
    v_mid = divider_voltage(0.5, 0.5, f["m_r_acc_pos"], f["m_r_acc_neg"], p) / p.v_read
    names = ["m_tx", "m_r_weight", "m_r_acc_pos", "m_r_acc_neg", "m_r_thr1", "m_r_thr2", "m_jitter"]
    rows = [[int(f["trial_index"][t])] + [f[n][t] for n in names] + [i[t], dq[t], v_mid[t]]
            for t in range(spec.trials)]
    run = Run(args, args.out)
    run.write("trials.csv", _csv_text(["trial"] + names + ["current_ua", "displacement_q", "v_pre_mid_norm"], rows))
    s1 = sweep_f1(kind, F1_GRID, spec, p)
    s2 = sweep_f2(Q_GRID, spec, p)
    run.write("f1_sweep.csv", _csv_text(["x", "trial", "y"], zip(s1.x, s1.trial, s1.y)))
    run.write("f2_sweep.csv", _csv_text(["x", "trial", "y"], zip(s2.x, s2.trial, s2.y)))
    run.finish([args.config])


def _read_scatter(path) -> Scatter:
    p = Path(path)
    if not p.is_file():
        raise UserError(f"sweep file not found: {p}")
    rows = list(csv.DictReader(p.open()))
    try:
        return Scatter(np.array([float(r["x"]) for r in rows]), np.array([int(r["trial"]) for r in rows]),
                       np.array([float(r["y"]) for r in rows]))
    except (KeyError, ValueError) as exc:
        raise UserError(f"{p}: expected columns x,trial,y ({exc})") from None


def cmd_fit(args):
    cp = _read_config(args.config)
    p = _device(cp)
    run = Run(args, args.out)
    if args.f1_sweep or args.f2_sweep:
        if not (args.f1_sweep and args.f2_sweep):
            raise UserError("give both --f1-sweep and --f2-sweep, or neither")
        s1, s2 = _read_scatter(args.f1_sweep), _read_scatter(args.f2_sweep)
        knee = f1_knee(args.kind, p)
        f1, f2 = fit_curve(s1, args.degree, knee=knee), fit_curve(s2, args.degree)
        lo = lower_envelope(s2, args.quantile, args.degree)
        offset, dr = f1_normalization(args.kind, p)
        noise = lambda s: dict(zip(("center", "mean", "std"), (a.tolist() for a in bin_stats(s)[:3])))
        model = FitModel(args.kind, f1.coeffs.tolist(), noise(s1), f2.coeffs.tolist(), lo.coeffs.tolist(),
                         f1_knee=knee, f2_noise=noise(s2),
                         fit_rmse={"f1": f1.rmse, "f2": f2.rmse, "f2_lower": lo.rmse}, dq_scale=dr,
                         dq_offset=offset, meta={"degree": args.degree, "quantile": args.quantile,
                                                 "trials": int(s1.trial.max()) + 1, "d_hybrid": 0.5})
    else:
        _need_seed(args)
        spec = _variation(cp, args.seed, args.trials)
        s1, s2 = sweep_f1(args.kind, F1_GRID, spec, p), sweep_f2(Q_GRID, spec, p)
        model = build_fit_model(args.kind, spec, p, args.degree, args.quantile)
    run.write("fit_model.json", model.to_json())
    for name, sc in (("f1", s1), ("f2", s2)):
        c, m, s, n = bin_stats(sc)
        run.write(f"{name}_bins.csv", _csv_text(["x", "mean", "std", "count"], zip(c, m, s, n)))
    xs = np.linspace(0, 1, 101)
    mean1, std1 = eval_f1(model, xs)
    run.write("f1_curve.csv", _csv_text(["x", "f1_mean", "f1_std"], zip(xs, mean1, std1)))
    ds = np.linspace(-1, 1, 201)
    run.write("f2_curve.csv", _csv_text(["d", "f2_mean", "f2_lower"],
                                        zip(ds, eval_f2(model, ds, "mean"), eval_f2(model, ds, "lower"))))
    print(f"f1 rmse {model.fit_rmse['f1']:.5f}  f2 rmse {model.fit_rmse['f2']:.5f}")
    run.finish([args.config, args.f1_sweep, args.f2_sweep])


def cmd_channel_replay(args):
    from .montecarlo import NOMINAL, sample
    from .scenarios import load_channel, parse_event_list, replay

    cp = _read_config(args.config)
    p = _device(cp)
    if not Path(args.channel).is_file():
        raise UserError(f"channel config not found: {args.channel}")
    if not Path(args.events).is_file():
        raise UserError(f"event list not found: {args.events}")
    ch = load_channel(args.channel, p)
    events = parse_event_list(Path(args.events).read_text())
    if args.trial is not None:
        _need_seed(args)
        spec = _variation(cp, args.seed, max(args.trial + 1, 1))
        smp = sample(spec, args.trial)
    else:
        smp = NOMINAL
    r = replay(ch, events, smp)
    run = Run(args, args.out)
    run.write("trajectory.csv", _csv_text(["t_us", "pixel", "q_pos", "q_neg"], zip(r.t_us, r.pixel, r.q_pos, r.q_neg)))
    run.write("decision.csv", _csv_text(["v_pre", "v_th", "spike"], [(r.v_pre, r.v_th, r.spike)]))
    print(f"v_pre {r.v_pre:.6f} V  v_th {r.v_th:.6f} V  spike {r.spike}")
    run.finish([args.config, args.channel, args.events])


def _layer_from(cp, weights_path) -> LayerConfig:
    sec = cp["layer"] if cp.has_section("layer") else {}
    p = Path(weights_path)
    if not p.is_file():
        raise UserError(f"weights file not found: {p}")
    with np.load(p) as z:
        keys = set(z.files)
        w = z["weights"] if "weights" in keys else z["w1"] if "w1" in keys else None
        thr = z["thresholds"] if "thresholds" in keys else z["thr1"] if "thr1" in keys else None
    if w is None or thr is None:
        raise UserError(f"{p}: needs arrays 'weights' and 'thresholds' (or 'w1' and 'thr1')")
    return LayerConfig(w, thr, kernel=int(sec.get("kernel", 3)), stride=int(sec.get("stride", 2)),
                       integration_t=int(sec.get("integration_t", 1000)),
                       polarity_mode=sec.get("polarity_mode", "two_channel"))


def cmd_infer(args):
    if args.noise == "on":
        _need_seed(args)
    cp = _read_config(args.config)
    fit = _load_fit(args.fit)
    cfg = _layer_from(cp, args.weights)
    src = Path(args.input)
    if not src.is_file():
        raise UserError(f"input stream not found: {src}")
    stream = parse_nmnist(src.read_bytes()) if src.suffix == ".bin" else parse_csv(src.read_text())
    res = conv_forward_analog(stream, cfg, fit, 1.0 if args.noise == "on" else 0.0, args.seed or 0)
    out = Path(args.out)
    run = Run(args, out.parent)
    run.write(out.name, emit_csv(res.spikes))
    bw = bandwidth(stream, res.spikes) if len(stream) else float("nan")
    run.write(out.stem + ".metrics.csv", _csv_text(
        ["in_spikes", "out_spikes", "bandwidth", "channels", "kernel", "stride"],
        [(len(stream), len(res.spikes), bw, cfg.channels, cfg.kernel, cfg.stride)]))
    print(f"in {len(stream)}  out {len(res.spikes)}  bandwidth {bw:.4f}")
    run.finish([args.config, args.fit, args.weights, args.input])


def _train_config(cp, args):
    from .codesign.train import TrainConfig

    kw = {}
    if cp.has_section("train"):
        ints = {"epochs", "batch_size", "channels", "hidden", "seed"}
        for k, raw in cp.items("train"):
            if k not in TrainConfig.__dataclass_fields__:
                raise UserError(f"unknown [train] key '{k}'")
            kw[k] = int(raw) if k in ints else float(raw)
    for k in ("epochs", "learning_rate", "noise_scale", "lambda_bw", "tunability_rho", "channels", "batch_size"):
        v = getattr(args, k, None)
        if v is not None:
            kw[k] = v
    kw["seed"] = args.seed
    return TrainConfig(**kw)


def _fit_for_training(args, cp):
    if getattr(args, "fit", None):
        return _load_fit(args.fit)
    return build_fit_model("hybrid", _variation(cp), _device(cp))


def _dataset(task, seed):
    from .codesign.data import make_dataset, split

    return split(make_dataset(task, 2000, seed))


def cmd_train(args):
    from .codesign.train import build_net, evaluate, save_checkpoint, train

    _need_seed(args)
    cp = _read_config(args.config)
    cfg = _train_config(cp, args)
    fit = _fit_for_training(args, cp)
    tr, te = _dataset(args.task, args.data_seed)
    net = build_net(fit, cfg)
    res = train(net, tr, cfg)
    acc, l1 = evaluate(net, te, 0.0, cfg.seed)
    run = Run(args, args.out)
    rows = [(h.epoch, h.loss, h.train_acc, h.layer1_rate) for h in res.history]
    run.write("metrics.csv", _csv_text(["epoch", "loss", "train_acc", "layer1_rate"], rows))
    run.write("summary.csv", _csv_text(["task", "test_acc", "layer1_spikes_per_sample"], [(args.task, acc, l1)]))
    save_checkpoint(net, cfg, Path(args.out) / "model", {"task": args.task, "data_seed": args.data_seed})
    run.outputs += [str(Path(args.out) / "model.json"), str(Path(args.out) / "model.npz")]
    print(f"test accuracy {acc:.4f}")
    run.finish([args.config, getattr(args, "fit", None)])


def _load_ckpt(path):
    from .codesign.train import load_checkpoint

    base = Path(path)
    if base.suffix in (".json", ".npz"):
        base = base.with_suffix("")
    if not base.with_suffix(".json").is_file() or not base.with_suffix(".npz").is_file():
        raise UserError(f"checkpoint not found: {base}.json / {base}.npz")
    return load_checkpoint(base)


def cmd_retrain(args):
    from .codesign.train import retrain_flow, save_checkpoint

    _need_seed(args)
    cp = _read_config(args.config)
    net, _, _ = _load_ckpt(args.checkpoint)
    cfg = _train_config(cp, args)
    tr, te = _dataset(args.task, args.data_seed)
    acc, new = retrain_flow(net, tr, te, args.mode, cfg)
    run = Run(args, args.out)
    dw = float((new.w1 - net.w1).detach().abs().max())
    run.write("retrain.csv", _csv_text(["task", "mode", "rho", "test_acc", "max_weight_excursion"],
                                       [(args.task, args.mode, cfg.tunability_rho, acc, dw)]))
    save_checkpoint(new, cfg, Path(args.out) / "model", {"task": args.task, "mode": args.mode})
    run.outputs += [str(Path(args.out) / "model.json"), str(Path(args.out) / "model.npz")]
    print(f"{args.mode}: test accuracy {acc:.4f}")
    run.finish([args.config, args.checkpoint])


def cmd_noise_sweep(args):
    from .codesign.train import noise_sensitivity

    _need_seed(args)
    net, _, extra = _load_ckpt(args.checkpoint)
    try:
        scales = [float(s) for s in args.scales.split(",")]
    except ValueError:
        raise UserError(f"--scales must be comma-separated numbers, got {args.scales!r}") from None
    task = args.task or extra.get("task", "bars")
    _, te = _dataset(task, args.data_seed)
    table = noise_sensitivity(net, te, scales, args.seed)
    run = Run(args, args.out)
    run.write("noise.csv", _csv_text(["noise_scale", "test_acc"], table))
    for s, a in table:
        print(f"noise {s:.2f}: {a:.4f}")
    run.finish([args.checkpoint])


def cmd_report(args):
    cp = _read_config(args.config)
    k = EnergyConstants(**{kk: float(v) for kk, v in cp.items("energy") if kk.startswith("e_")}) \
        if cp.has_section("energy") else EnergyConstants()
    down = cp["energy"] if cp.has_section("energy") else {}
    d_fanout = float(down.get("downstream_fanout", 0))
    d_mem = int(down.get("downstream_membrane", 0))
    runs = []
    for d in sorted(args.runs):
        d = Path(d)
        if not d.is_dir():
            raise UserError(f"run directory not found: {d}")
        r = RunSummary(d.name)
        for m in sorted(d.glob("*.metrics.csv")):
            row = next(csv.DictReader(m.open()))
            r.in_spikes, r.out_spikes, r.bandwidth = int(row["in_spikes"]), int(row["out_spikes"]), float(row["bandwidth"])
            fan = int(row["channels"]) * (int(row["kernel"]) / int(row["stride"])) ** 2
            layers = [LayerCounts(r.in_spikes, fan), LayerCounts(r.out_spikes, d_fanout, d_mem)]
            if r.in_spikes:
                rep = energy(layers, k, r.bandwidth)
                r.baseline_pj, r.p2m_pj, r.savings_pct = rep.baseline_energy, rep.p2m_energy, 100 * rep.savings
        for name in ("summary.csv", "retrain.csv"):
            f = d / name
            if f.is_file():
                r.accuracy = float(next(csv.DictReader(f.open()))["test_acc"])
        runs.append(r)
    run = Run(args, args.out)
    text = report_csv(runs)
    assert parse_report_csv(text) == sorted(runs, key=lambda r: r.name)
    run.write("report.csv", text)
    table = report_text(runs)
    run.write("report.txt", table)
    print(table, end="")
    run.finish(args.runs)


# --- parser ------------------------------------------------------------------------------

COMMANDS = {
    "device-sweep": cmd_device_sweep,
    "mc-run": cmd_mc_run,
    "fit": cmd_fit,
    "channel-replay": cmd_channel_replay,
    "infer": cmd_infer,
    "train": cmd_train,
    "retrain": cmd_retrain,
    "noise-sweep": cmd_noise_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dwp2m", description="Domain-wall in-pixel compute: device to network pipeline.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, help_, seed=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="INI config file (see docs/config.md)")
        if seed:
            sp.add_argument("--seed", type=int, help="master seed; required for stochastic runs")
        return sp

    sp = add("device-sweep", "resistance and velocity curves of one device")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-q", type=int, default=21)
    sp.add_argument("--n-bias", type=int, default=5)
    sp.add_argument("--v-max", type=float, default=0.4)
    sp.add_argument("--n-current", type=int, default=56)

    sp = add("mc-run", "Monte Carlo trials plus f1/f2 sweep scatters", seed=True)
    sp.add_argument("--kind", choices=CONFIG_TAGS, default="hybrid")
    sp.add_argument("--weight", type=float, default=1.0)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--out", required=True)

    sp = add("fit", "fit f1/f2 and write a fit model", seed=True)
    sp.add_argument("--kind", choices=CONFIG_TAGS, default="hybrid")
    sp.add_argument("--f1-sweep")
    sp.add_argument("--f2-sweep")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--degree", type=int, default=3)
    sp.add_argument("--quantile", type=float, default=0.01)
    sp.add_argument("--out", required=True)

    sp = add("channel-replay", "replay an event list through one channel", seed=True)
    sp.add_argument("--channel", required=True, help="INI file with a [channel] section")
    sp.add_argument("--events", required=True, help="CSV t_us,pixel")
    sp.add_argument("--trial", type=int, help="apply the variation sample of this trial")
    sp.add_argument("--out", required=True)

    sp = add("infer", "run the analog first layer over an event stream", seed=True)
    sp.add_argument("--fit", required=True)
    sp.add_argument("--weights", required=True, help=".npz with weights/thresholds (or a training checkpoint)")
    sp.add_argument("--input", required=True, help=".bin (N-MNIST) or .csv stream")
    sp.add_argument("--noise", choices=("on", "off"), default="off")
    sp.add_argument("--out", required=True, help="output spike CSV")

    for name, help_ in (("train", "train the toy network"), ("retrain", "adapt a trained network to a new task")):
        sp = add(name, help_, seed=True)
        sp.add_argument("--task", choices=("bars", "dots"), default="bars" if name == "train" else "dots")
        sp.add_argument("--data-seed", type=int, default=0)
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--learning-rate", type=float)
        sp.add_argument("--batch-size", type=int)
        sp.add_argument("--noise-scale", type=float)
        sp.add_argument("--lambda-bw", type=float)
        sp.add_argument("--tunability-rho", type=float)
        sp.add_argument("--out", required=True)
        if name == "train":
            sp.add_argument("--fit")
            sp.add_argument("--channels", type=int)
        else:
            sp.add_argument("--checkpoint", required=True)
            sp.add_argument("--mode", choices=("none", "freeze_first", "full"), default="full")

    sp = add("noise-sweep", "accuracy of a trained network under f1/f2 noise", seed=True)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--task", choices=("bars", "dots"))
    sp.add_argument("--data-seed", type=int, default=0)
    sp.add_argument("--scales", default="0,0.1,0.2,0.4")
    sp.add_argument("--out", required=True)

    sp = add("report", "bandwidth / energy / accuracy summary over run directories")
    sp.add_argument("runs", nargs="*")
    sp.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        hint = difflib.get_close_matches(argv[0], COMMANDS, n=1)
        msg = f"unknown command '{argv[0]}'"
        if hint:
            msg += f"; did you mean '{hint[0]}'?"
        print(f"dwp2m: {msg}\navailable: {', '.join(COMMANDS)}", file=sys.stderr)
        return 1
    try:
        args = ap.parse_args(argv)
    except UserError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        ap.print_help()
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    args.argv = argv
    try:
        COMMANDS[args.command](args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, FabricationGuardError, AssertionError) as exc:
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2
    except (DeviceParamError, EventFormatError, FitError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations we did not anticipate
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
