"""Lossless model checkpoints.

A checkpoint is canonical JSON: sorted keys, fixed separators, every float
serialized as its IEEE-754 hex form (``float.hex``), masks as 0/1 ints.
Round trips are therefore bit-exact and save -> load -> save reproduces the
file byte for byte.  Loading validates the format version, all shapes, the
mask alphabet, and that masked weights are exact zeros.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .cell import GATES, CellParams, ConnectivityMask
from .network import StackedNetwork

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Raised when a checkpoint file fails validation."""


def _encode_array(arr: np.ndarray):
    flat = [float(v).hex() for v in arr.reshape(-1)]
    return {"shape": list(arr.shape), "data": flat}


def _decode_array(obj, expect_shape=None) -> np.ndarray:
    try:
        shape = tuple(obj["shape"])
        arr = np.array([float.fromhex(v) for v in obj["data"]], dtype=np.float64)
        arr = arr.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt array field: {exc}") from None
    if expect_shape is not None and arr.shape != expect_shape:
        raise CheckpointError(f"array has shape {arr.shape}, expected {expect_shape}")
    return arr


def _encode_mask(mask: ConnectivityMask):
    return {g: mask.gates[g].astype(int).reshape(-1).tolist() for g in GATES}


def save_checkpoint(net: StackedNetwork, mu: float, sigma: float, path,
                    meta: dict | None = None) -> None:
    """Write the network plus normalization stats to ``path``.

    ``meta`` carries run provenance (window length, connectivity spec,
    seeds, config digest); it must be JSON-serializable.
    """
    layers = []
    for params in net.layers:
        layers.append({
            "input_dim": params.input_dim,
            "hidden_dim": params.hidden_dim,
            "weights": {g: _encode_array(params.weight(g)) for g in GATES},
            "biases": {g: _encode_array(params.bias(g)) for g in GATES},
            "mask": _encode_mask(params.mask),
        })
    doc = {
        "format_version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "hidden_dim": net.hidden_dim,
        "layers": layers,
        "head_w": _encode_array(net.head_w),
        "head_b": float(net.head_b).hex(),
        "mu": float(mu).hex(),
        "sigma": float(sigma).hex(),
        "meta": meta or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path):
    """Load a checkpoint; returns (network, mu, sigma, meta)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"not valid JSON: {exc}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"format_version {version!r} not supported (want {FORMAT_VERSION})")
    try:
        input_dim = int(doc["input_dim"])
        hidden_dim = int(doc["hidden_dim"])
        layer_docs = doc["layers"]
        head_b = float.fromhex(doc["head_b"])
        mu = float.fromhex(doc["mu"])
        sigma = float.fromhex(doc["sigma"])
        meta = doc["meta"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt field: {exc}") from None
    if not isinstance(meta, dict):
        raise CheckpointError("meta field must be an object")
    head_w = _decode_array(doc["head_w"], (hidden_dim,))
    layers = []
    for li, ldoc in enumerate(layer_docs):
        d = int(ldoc["input_dim"])
        h = int(ldoc["hidden_dim"])
        expect_d = input_dim if li == 0 else hidden_dim
        if d != expect_d or h != hidden_dim:
            raise CheckpointError(
                f"layer {li} dims ({d}, {h}) inconsistent with network "
                f"({expect_d}, {hidden_dim})"
            )
        shape = (h, d + h)
        gates = {}
        for g in GATES:
            raw = ldoc["mask"][g]
            if len(raw) != h * (d + h) or any(v not in (0, 1) for v in raw):
                raise CheckpointError(f"layer {li} gate {g}: invalid mask entries")
            gates[g] = np.array(raw, dtype=np.float64).reshape(shape)
        mask = ConnectivityMask(gates=gates, input_dim=d, hidden_dim=h)
        weights = {g: _decode_array(ldoc["weights"][g], shape) for g in GATES}
        biases = {g: _decode_array(ldoc["biases"][g], (h,)) for g in GATES}
        for g in GATES:
            if np.any(weights[g][gates[g] == 0.0] != 0.0):
                raise CheckpointError(f"layer {li} gate {g}: masked weight is nonzero")
        layers.append(CellParams(
            W_i=weights["i"], W_f=weights["f"], W_o=weights["o"], W_c=weights["c"],
            b_i=biases["i"], b_f=biases["f"], b_o=biases["o"], b_c=biases["c"],
            mask=mask,
        ))
    net = StackedNetwork(
        layers=layers,
        head_w=head_w,
        head_b=head_b,
        input_dim=input_dim,
        hidden_dim=hidden_dim,
    )
    return net, mu, sigma, meta


def config_digest(obj) -> str:
    """Stable sha256 digest of a JSON-serializable config."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()
