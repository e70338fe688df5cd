import csv
import json

from rclstm.cli import main


def run(argv):
    return main(argv)


def common_args(tmp_path, extra=()):
    return [
        "--series-length", "400", "--hidden", "4", "--layers", "1",
        "--window", "5", "--epochs", "2", "--test-size", "50",
        "--seed", "7", "--out", str(tmp_path),
    ] + list(extra)


def test_train_then_predict_round_trip(tmp_path, capsys):
    assert run(["train"] + common_args(tmp_path, ["--connectivity", "0.5"])) == 0
    out = capsys.readouterr().out
    assert "checkpoint" in out and "mse=" in out
    ckpt = tmp_path / "checkpoint.json"
    assert ckpt.exists()
    first = (tmp_path / "pred_vs_actual.csv").read_bytes()

    pred_dir = tmp_path / "pred"
    assert run([
        "predict", "--checkpoint", str(ckpt), "--series-length", "400",
        "--test-size", "50", "--seed", "7", "--out", str(pred_dir),
    ]) == 0
    assert (pred_dir / "pred_vs_actual.csv").read_bytes() == first


def test_sweep_connectivity_command(tmp_path):
    assert run(["sweep-connectivity"] + common_args(tmp_path, ["--trials", "1"])) == 0
    with open(tmp_path / "results.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["mode"] == "sweep-connectivity"


def test_sweep_seqlen_command(tmp_path):
    assert run(["sweep-seqlen"] + common_args(tmp_path, ["--trials", "1",
                                                         "--seqlens", "3", "4"])) == 0
    with open(tmp_path / "results.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 3


def test_config_error_exit_code(tmp_path, capsys):
    # test split larger than the series
    code = run(["train"] + common_args(tmp_path, ["--test-size", "5000"]))
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_missing_data_file_exit_code(tmp_path, capsys):
    code = run(["train", "--data", str(tmp_path / "absent.csv"),
                "--out", str(tmp_path)])
    assert code == 2
