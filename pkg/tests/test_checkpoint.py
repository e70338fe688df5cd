import json

import numpy as np
import pytest

from rclstm.cell import GATES
from rclstm.checkpoint import (
    CheckpointError,
    config_digest,
    load_checkpoint,
    save_checkpoint,
)
from rclstm.data import SplitSpec, make_windows, normalize, split, synth_traffic
from rclstm.metrics import evaluate
from rclstm.network import build_network
from rclstm.training import TrainConfig, train


@pytest.fixture(scope="module")
def trained():
    series = normalize(synth_traffic(260, seed=2))
    dataset = make_windows(series, 6)
    train_set, test_set = split(dataset, SplitSpec(test_size=40))
    net = build_network(2, 1, 6, 0.35, seed=3)
    train(net, train_set, TrainConfig(epochs=3, seed=4))
    return net, series, test_set


def test_round_trip_bit_exact(trained, tmp_path):
    net, series, test_set = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path, meta={"window": 6})
    loaded, mu, sigma, meta = load_checkpoint(path)
    assert mu == series.mu and sigma == series.sigma
    assert meta["window"] == 6
    for pa, pb in zip(net.layers, loaded.layers):
        for g in GATES:
            assert np.array_equal(pa.weight(g), pb.weight(g))
            assert np.array_equal(pa.bias(g), pb.bias(g))
            assert np.array_equal(pa.mask.gates[g], pb.mask.gates[g])
    assert np.array_equal(net.head_w, loaded.head_w)
    assert net.head_b == loaded.head_b


def test_save_load_save_byte_identical(trained, tmp_path):
    net, series, _ = trained
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_checkpoint(net, series.mu, series.sigma, p1, meta={"window": 6})
    loaded, mu, sigma, meta = load_checkpoint(p1)
    save_checkpoint(loaded, mu, sigma, p2, meta=meta)
    assert p1.read_bytes() == p2.read_bytes()


def test_loaded_network_evaluates_identically(trained, tmp_path):
    net, series, test_set = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    loaded, _, _, _ = load_checkpoint(path)
    before = evaluate(net, test_set)
    after = evaluate(loaded, test_set)
    assert np.array_equal(before.predictions, after.predictions)
    assert before.mse == after.mse
    assert before.mae == after.mae


def test_version_mismatch(trained, tmp_path):
    net, series, _ = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    doc = json.loads(path.read_text())
    doc["format_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="format_version"):
        load_checkpoint(path)


def test_tampered_mask_entry_rejected(trained, tmp_path):
    net, series, _ = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    doc = json.loads(path.read_text())
    doc["layers"][0]["mask"]["i"][0] = 2
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="mask"):
        load_checkpoint(path)


def test_corrupt_float_rejected(trained, tmp_path):
    net, series, _ = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    doc = json.loads(path.read_text())
    doc["head_b"] = "not-a-float"
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="corrupt"):
        load_checkpoint(path)


def test_shape_mismatch_rejected(trained, tmp_path):
    net, series, _ = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    doc = json.loads(path.read_text())
    doc["layers"][0]["weights"]["i"]["data"].append(float(1.0).hex())
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_masked_nonzero_weight_rejected(trained, tmp_path):
    net, series, _ = trained
    path = tmp_path / "ckpt.json"
    save_checkpoint(net, series.mu, series.sigma, path)
    doc = json.loads(path.read_text())
    mask_flat = doc["layers"][0]["mask"]["i"]
    dead_index = mask_flat.index(0)
    doc["layers"][0]["weights"]["i"]["data"][dead_index] = float(0.5).hex()
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError, match="masked weight"):
        load_checkpoint(path)


def test_config_digest_stable():
    a = config_digest({"x": 1, "y": [1, 2]})
    b = config_digest({"y": [1, 2], "x": 1})
    assert a == b
    assert len(a) == 64
