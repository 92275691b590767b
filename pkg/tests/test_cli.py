import csv
import json

import numpy as np
import pytest

from cli_runs import run_stochastic, write_inputs
from dwp2m.cli import main
from dwp2m.fitting import FitModel


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "device-sweep" in capsys.readouterr().out
    assert main(["train", "--help"]) == 0


def test_no_command():
    assert main([]) == 1


def test_unknown_command_suggests(capsys):
    assert main(["trian"]) == 1
    err = capsys.readouterr().err
    assert "did you mean 'train'" in err and "noise-sweep" in err


def test_bad_flag_is_user_error(capsys):
    assert main(["device-sweep"]) == 1
    assert "--out" in capsys.readouterr().err


def test_infer_missing_fit_names_path(tmp_path, capsys):
    inp = write_inputs(tmp_path)
    missing = tmp_path / "nope.json"
    code = main(["infer", "--seed", "1", "--fit", str(missing), "--weights", inp["layer.npz"],
                 "--input", inp["stream.csv"], "--out", str(tmp_path / "o.csv")])
    assert code == 1
    assert str(missing) in capsys.readouterr().err


def test_stochastic_command_requires_seed(tmp_path, capsys):
    assert main(["mc-run", "--out", str(tmp_path)]) == 1
    assert "--seed" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["device-sweep", "--config", str(tmp_path / "x.ini"), "--out", str(tmp_path)]) == 1


def test_bad_config_value(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[device]\ntmr0 = -1\n")
    assert main(["device-sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    cfg.write_text("[variation]\nsigma_z = 1\n")
    assert main(["mc-run", "--seed", "1", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_device_sweep_outputs(tmp_path):
    out = tmp_path / "dev"
    assert main(["device-sweep", "--out", str(out)]) == 0
    r = _rows(out / "resistance.csv")
    assert len(r) == 21 * 5
    v = _rows(out / "velocity.csv")
    assert float(v[0]["velocity_mps"]) == 0.0
    m = json.loads((out / "manifest.json").read_text())
    assert m["command"] == "device-sweep" and m["seed"] is None and len(m["outputs"]) == 2
    assert sorted(p.name for p in out.iterdir()) == ["manifest.json", "resistance.csv", "velocity.csv"]


def test_channel_replay_nominal(tmp_path):
    inp = write_inputs(tmp_path / "in")
    out = tmp_path / "r"
    assert main(["channel-replay", "--channel", inp["channel.ini"], "--events", inp["events.csv"],
                 "--out", str(out)]) == 0
    traj = _rows(out / "trajectory.csv")
    assert len(traj) == 27
    dec = _rows(out / "decision.csv")
    assert dec[0]["spike"] in ("0", "1")
    assert main(["channel-replay", "--trial", "2", "--channel", inp["channel.ini"], "--events", inp["events.csv"],
                 "--out", str(out)]) == 1


def test_fit_from_seed_writes_model(tmp_path):
    assert main(["fit", "--seed", "0", "--trials", "200", "--out", str(tmp_path)]) == 0
    m = FitModel.load(tmp_path / "fit_model.json")
    assert m.config_tag == "hybrid" and m.meta["trials"] == 200
    for name in ("f1_bins.csv", "f2_bins.csv", "f1_curve.csv", "f2_curve.csv"):
        assert (tmp_path / name).is_file()


def test_infer_writes_spikes_and_metrics(tmp_path, hybrid_fit):
    inp = write_inputs(tmp_path / "in")
    hybrid_fit.save(tmp_path / "fit.json")
    out = tmp_path / "o" / "spikes.csv"
    assert main(["infer", "--fit", str(tmp_path / "fit.json"), "--weights", inp["layer.npz"],
                 "--input", inp["stream.csv"], "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# width=7 height=7 channels=4\nt_us,x,y,channel\n")
    met = _rows(out.with_name("spikes.metrics.csv"))[0]
    assert int(met["out_spikes"]) == len(text.splitlines()) - 2
    assert float(met["bandwidth"]) == pytest.approx(int(met["out_spikes"]) / int(met["in_spikes"]))
    # noise on needs a seed
    assert main(["infer", "--noise", "on", "--fit", str(tmp_path / "fit.json"), "--weights", inp["layer.npz"],
                 "--input", inp["stream.csv"], "--out", str(out)]) == 1


def test_infer_rejects_bad_stream(tmp_path, hybrid_fit, capsys):
    inp = write_inputs(tmp_path / "in")
    hybrid_fit.save(tmp_path / "fit.json")
    bad = tmp_path / "bad.csv"
    bad.write_text("t_us,x,y,polarity\n5,0,0,1\n1,0,0,1\n")
    assert main(["infer", "--fit", str(tmp_path / "fit.json"), "--weights", inp["layer.npz"],
                 "--input", str(bad), "--out", str(tmp_path / "o.csv")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_full_pipeline_and_report(tmp_path):
    codes = run_stochastic(tmp_path)
    assert all(c == 0 for c in codes.values()), codes
    assert float(_rows(tmp_path / "retrain" / "retrain.csv")[0]["max_weight_excursion"]) <= 0.175
    assert [r["noise_scale"] for r in _rows(tmp_path / "noise" / "noise.csv")] == ["0.0", "0.4"]
    cfg = tmp_path / "energy.ini"
    cfg.write_text("[energy]\ne_tx = 21.5\ndownstream_fanout = 64\ndownstream_membrane = 1000\n")
    rep = tmp_path / "report"
    assert main(["report", "--config", str(cfg), str(tmp_path / "infer"), str(tmp_path / "train"),
                 "--out", str(rep)]) == 0
    rows = _rows(rep / "report.csv")
    assert [r["name"] for r in rows] == ["infer", "train"]
    assert rows[0]["savings_pct"] != "" and rows[1]["accuracy"] != ""
    assert "%" in (rep / "report.txt").read_text()


def test_report_empty(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.csv").read_text().count("\n") == 1
    assert main(["report", str(tmp_path / "missing"), "--out", str(tmp_path)]) == 1


def test_noise_sweep_missing_checkpoint(tmp_path):
    assert main(["noise-sweep", "--seed", "1", "--checkpoint", str(tmp_path / "x"), "--out", str(tmp_path)]) == 1
