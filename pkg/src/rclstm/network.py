"""Stacked memory-block network with a linear readout.

Three blocks by default: timestep t feeds layer 0, each layer's hidden
state feeds the layer above, and a single linear unit on the top layer's
final hidden state emits the one-step-ahead forecast.  Every window starts
from zero states; windows are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell import (
    CellParams,
    CellState,
    GateCache,
    MaskSpec,
    forward_step,
    generate_mask,
    init_params,
    step_batch,
)
from .seeding import derive_seed


@dataclass
class StackedNetwork:
    layers: list
    head_w: np.ndarray
    head_b: float
    input_dim: int
    hidden_dim: int

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def layer_input_dim(self, index: int) -> int:
        return self.input_dim if index == 0 else self.hidden_dim


@dataclass
class ForwardTrace:
    """Per-layer, per-timestep gate caches plus the readout value(s)."""

    caches: list           # caches[layer][t] -> GateCache
    predictions: np.ndarray  # (batch,)

    @property
    def prediction(self) -> float:
        if self.predictions.shape != (1,):
            raise ValueError("trace holds a batch, not a single prediction")
        return float(self.predictions[0])


def build_network(layer_count: int, input_dim: int, hidden_dim: int,
                  connectivity: float, seed: int) -> StackedNetwork:
    """Build a stacked network with an independent mask per layer.

    Per-layer mask and weight seeds are derived from ``seed``, so the same
    arguments always yield the same network.  The readout weights are drawn
    Uniform(-1/sqrt(H), 1/sqrt(H)) with zero bias.
    """
    if layer_count < 1:
        raise ValueError("layer_count must be >= 1")
    if not 0.0 <= connectivity <= 1.0:
        raise ValueError(f"connectivity must be in [0, 1], got {connectivity}")
    layers = []
    for idx in range(layer_count):
        d = input_dim if idx == 0 else hidden_dim
        mask = generate_mask(
            MaskSpec(connectivity=connectivity, seed=derive_seed(seed, "mask", idx)),
            input_dim=d,
            hidden_dim=hidden_dim,
        )
        layers.append(init_params(mask, derive_seed(seed, "init", idx), d, hidden_dim))
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "head")))
    scale = 1.0 / np.sqrt(hidden_dim)
    head_w = rng.uniform(-scale, scale, size=hidden_dim)
    return StackedNetwork(
        layers=layers,
        head_w=head_w,
        head_b=0.0,
        input_dim=input_dim,
        hidden_dim=hidden_dim,
    )


def forward_batch(net: StackedNetwork, x: np.ndarray, want_trace: bool = True):
    """Run a batch of windows through the stack.

    ``x`` is (batch, length, input_dim).  Returns (predictions, caches);
    caches is None when ``want_trace`` is false (evaluation mode).
    """
    if x.ndim != 3 or x.shape[2] != net.input_dim:
        raise ValueError(
            f"batch has shape {x.shape}, want (B, L, {net.input_dim})"
        )
    batch, length, _ = x.shape
    if length < 1:
        raise ValueError("empty sequence")
    h = [np.zeros((batch, net.hidden_dim)) for _ in net.layers]
    c = [np.zeros((batch, net.hidden_dim)) for _ in net.layers]
    caches = [[] for _ in net.layers] if want_trace else None
    for t in range(length):
        inp = x[:, t, :]
        for li, params in enumerate(net.layers):
            cache = step_batch(params, h[li], c[li], inp)
            h[li] = cache.o * cache.tanh_c
            c[li] = cache.c
            if want_trace:
                caches[li].append(cache)
            inp = h[li]
    predictions = h[-1] @ net.head_w + net.head_b
    return predictions, caches


def forward_sequence(net: StackedNetwork, seq) -> tuple[float, ForwardTrace]:
    """Forecast the next value from one window of input vectors."""
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ValueError(f"sequence has shape {x.shape}, want (L, {net.input_dim})")
    if x.shape[0] < 1:
        raise ValueError("empty sequence")
    predictions, caches = forward_batch(net, x[None, :, :], want_trace=True)
    trace = ForwardTrace(caches=caches, predictions=predictions)
    return trace.prediction, trace


def forward_sequence_stepwise(net: StackedNetwork, seq) -> float:
    """Same forecast via the single-vector step API; used as a cross-check."""
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    states = [CellState.zeros(net.hidden_dim) for _ in net.layers]
    for t in range(x.shape[0]):
        inp = x[t]
        for li, params in enumerate(net.layers):
            states[li], _ = forward_step(params, states[li], inp)
            inp = states[li].h
    return float(np.dot(net.head_w, states[-1].h) + net.head_b)
