"""A single randomly connected LSTM memory block.

The block works on the concatenated input ``a = [x, h_prev]``.  Which of the
``4 * H * (D + H)`` input-to-gate connections exist is decided once, up
front, by thresholding per-edge uniform draws; the surviving pattern is
frozen as a binary mask and the corresponding weights are the only trainable
ones.  Biases are not edges of that bipartite graph and are never masked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import concat, hadamard, matvec, sigmoid, tanh_act

GATES = ("i", "f", "o", "c")


@dataclass(frozen=True)
class MaskSpec:
    """Target connection fraction plus the seed that realizes it."""

    connectivity: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.connectivity <= 1.0:
            raise ValueError(f"connectivity must be in [0, 1], got {self.connectivity}")

    @property
    def threshold(self) -> float:
        """Draw p ~ U(0,1) and keep the edge iff p >= threshold."""
        return 1.0 - self.connectivity


@dataclass
class ConnectivityMask:
    """Four frozen binary H x (D+H) matrices, one per gate (i, f, o, c)."""

    gates: dict
    input_dim: int
    hidden_dim: int

    def __post_init__(self):
        shape = (self.hidden_dim, self.input_dim + self.hidden_dim)
        for g in GATES:
            m = self.gates[g]
            if m.shape != shape:
                raise ValueError(f"mask for gate {g} has shape {m.shape}, want {shape}")
            if not np.all((m == 0.0) | (m == 1.0)):
                raise ValueError(f"mask for gate {g} has entries outside {{0, 1}}")

    @property
    def realized_connectivity(self) -> float:
        total = sum(float(np.sum(self.gates[g])) for g in GATES)
        return total / (4.0 * self.hidden_dim * (self.input_dim + self.hidden_dim))

    def ones_count(self) -> int:
        return int(sum(np.sum(self.gates[g]) for g in GATES))


@dataclass
class CellParams:
    """Weights and biases of one block; masked weight entries are exactly 0."""

    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray
    mask: ConnectivityMask

    @property
    def input_dim(self) -> int:
        return self.mask.input_dim

    @property
    def hidden_dim(self) -> int:
        return self.mask.hidden_dim

    def weight(self, gate: str) -> np.ndarray:
        return getattr(self, f"W_{gate}")

    def bias(self, gate: str) -> np.ndarray:
        return getattr(self, f"b_{gate}")


@dataclass
class CellState:
    """Recurrent state (h, c) of one block."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int) -> "CellState":
        return cls(h=np.zeros(hidden_dim), c=np.zeros(hidden_dim))


@dataclass
class GateCache:
    """Per-step values kept for the backward pass.

    Arrays are (batch, dim); single-sequence calls use batch = 1.
    """

    a: np.ndarray        # [x, h_prev]
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    z: np.ndarray
    c_prev: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def generate_mask(spec: MaskSpec, input_dim: int, hidden_dim: int) -> ConnectivityMask:
    """Sample the frozen connection pattern for one block.

    Each potential edge gets an independent p ~ U(0,1) from a PCG64 stream
    seeded by ``spec.seed``; the edge exists iff p >= 1 - connectivity.
    Draw order is fixed (gates i, f, o, c, each row-major), so the same spec
    and dims always reproduce the same mask bit for bit.
    """
    if input_dim <= 0 or hidden_dim <= 0:
        raise ValueError("input_dim and hidden_dim must be positive")
    shape = (hidden_dim, input_dim + hidden_dim)
    gates = {}
    if spec.connectivity == 0.0:
        for g in GATES:
            gates[g] = np.zeros(shape)
    else:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        t = spec.threshold
        for g in GATES:
            p = rng.random(shape)
            gates[g] = (p >= t).astype(np.float64)
    return ConnectivityMask(gates=gates, input_dim=input_dim, hidden_dim=hidden_dim)


def init_params(mask: ConnectivityMask, seed: int, input_dim: int, hidden_dim: int) -> CellParams:
    """Initialize weights Uniform(-1/sqrt(H), 1/sqrt(H)) under the mask.

    The forget bias starts at 1.0 so early gradients survive the forget
    gate; the other biases start at zero.  Masked weight entries are exact
    zeros from the start.
    """
    if input_dim != mask.input_dim or hidden_dim != mask.hidden_dim:
        raise ValueError(
            f"dims ({input_dim}, {hidden_dim}) do not match mask "
            f"({mask.input_dim}, {mask.hidden_dim})"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    scale = 1.0 / np.sqrt(hidden_dim)
    shape = (hidden_dim, input_dim + hidden_dim)
    weights = {}
    for g in GATES:
        w = rng.uniform(-scale, scale, size=shape)
        weights[g] = np.where(mask.gates[g] == 1.0, w, 0.0)
    return CellParams(
        W_i=weights["i"],
        W_f=weights["f"],
        W_o=weights["o"],
        W_c=weights["c"],
        b_i=np.zeros(hidden_dim),
        b_f=np.ones(hidden_dim),
        b_o=np.zeros(hidden_dim),
        b_c=np.zeros(hidden_dim),
        mask=mask,
    )


def apply_mask(params: CellParams) -> CellParams:
    """Force masked weight entries back to exact zero; biases untouched."""
    for g in GATES:
        w = params.weight(g)
        np.copyto(w, np.where(params.mask.gates[g] == 1.0, w, 0.0))
    return params


def forward_step(params: CellParams, state: CellState, x: np.ndarray):
    """One masked LSTM step on a single input vector.

    Computes, with a = [x, h_prev]:
        i = sigmoid(W_i a + b_i)      f = sigmoid(W_f a + b_f)
        o = sigmoid(W_o a + b_o)      z = tanh(W_c a + b_c)
        c' = f * c + i * z            h' = o * tanh(c')

    Returns the new state and the cache needed for backprop.
    """
    if x.shape != (params.input_dim,):
        raise ValueError(
            f"input has shape {x.shape}, cell expects ({params.input_dim},)"
        )
    if state.h.shape != (params.hidden_dim,):
        raise ValueError(
            f"state has shape {state.h.shape}, cell expects ({params.hidden_dim},)"
        )
    a = concat(x, state.h)
    i = sigmoid(matvec(params.W_i, a) + params.b_i)
    f = sigmoid(matvec(params.W_f, a) + params.b_f)
    o = sigmoid(matvec(params.W_o, a) + params.b_o)
    z = tanh_act(matvec(params.W_c, a) + params.b_c)
    c_new = hadamard(f, state.c) + hadamard(i, z)
    tanh_c = tanh_act(c_new)
    h_new = hadamard(o, tanh_c)
    cache = GateCache(
        a=a[None, :],
        i=i[None, :],
        f=f[None, :],
        o=o[None, :],
        z=z[None, :],
        c_prev=state.c[None, :],
        c=c_new[None, :],
        tanh_c=tanh_c[None, :],
    )
    return CellState(h=h_new, c=c_new), cache


def step_batch(params: CellParams, h_prev: np.ndarray, c_prev: np.ndarray,
               x: np.ndarray) -> GateCache:
    """Vectorized step over a batch: x is (B, D), h/c are (B, H)."""
    a = np.hstack([x, h_prev])
    i = sigmoid(a @ params.W_i.T + params.b_i)
    f = sigmoid(a @ params.W_f.T + params.b_f)
    o = sigmoid(a @ params.W_o.T + params.b_o)
    z = tanh_act(a @ params.W_c.T + params.b_c)
    c_new = f * c_prev + i * z
    tanh_c = tanh_act(c_new)
    return GateCache(a=a, i=i, f=f, o=o, z=z, c_prev=c_prev, c=c_new, tanh_c=tanh_c)


def trainable_weight_count(params: CellParams) -> int:
    """Number of trainable parameters: surviving weights plus all biases."""
    return params.mask.ones_count() + 4 * params.hidden_dim
