"""Loss, exact backprop through time, Adam updates, and a gradient oracle.

The backward pass differentiates the unrolled stack exactly (no
truncation; windows are short).  Gradients at masked weight positions are
zeroed so frozen connections never move, updates are clipped by global
norm, and the mask is re-applied after every step as a belt-and-braces
guarantee of the sparsity invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cell import GATES, apply_mask
from .network import ForwardTrace, StackedNetwork, forward_batch, forward_sequence
from .seeding import derive_seed


class TrainingDivergedError(RuntimeError):
    """Raised when a training step produces a non-finite loss."""


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 20
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epsilon <= 0 or self.clip_norm <= 0:
            raise ValueError("learning_rate, epsilon and clip_norm must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")


@dataclass
class LayerGrads:
    dW_i: np.ndarray
    dW_f: np.ndarray
    dW_o: np.ndarray
    dW_c: np.ndarray
    db_i: np.ndarray
    db_f: np.ndarray
    db_o: np.ndarray
    db_c: np.ndarray

    def weight(self, gate: str) -> np.ndarray:
        return getattr(self, f"dW_{gate}")

    def bias(self, gate: str) -> np.ndarray:
        return getattr(self, f"db_{gate}")


@dataclass
class Gradients:
    layers: list
    d_head_w: np.ndarray
    d_head_b: float

    def arrays(self):
        """Gradient arrays in canonical order (scalars excluded)."""
        for lg in self.layers:
            for g in GATES:
                yield lg.weight(g)
            for g in GATES:
                yield lg.bias(g)
        yield self.d_head_w

    def global_norm(self) -> float:
        total = 0.0
        for arr in self.arrays():
            total += float(np.sum(arr * arr))
        total += self.d_head_b * self.d_head_b
        return math.sqrt(total)

    def scale(self, factor: float) -> None:
        for arr in self.arrays():
            arr *= factor
        self.d_head_b *= factor


def loss_mse(pred: float, target: float) -> float:
    """Squared error of a single forecast."""
    return (pred - target) ** 2


def backward_batch(net: StackedNetwork, caches, x: np.ndarray,
                   predictions: np.ndarray, targets: np.ndarray) -> Gradients:
    """Gradients of the mean squared error over a batch of windows.

    ``caches`` must come from ``forward_batch`` on the same ``x``.  Gradients
    at masked weight positions are zeroed at the end.
    """
    batch, length, _ = x.shape
    hidden = net.hidden_dim
    dpred = 2.0 * (predictions - targets) / batch

    h_last = caches[-1][length - 1].o * caches[-1][length - 1].tanh_c
    d_head_w = h_last.T @ dpred
    d_head_b = float(np.sum(dpred))

    # gradient flowing into each layer's h at each timestep from above
    d_above = np.zeros((length, batch, hidden))
    d_above[length - 1] = dpred[:, None] * net.head_w[None, :]

    layer_grads: list = [None] * net.layer_count
    for li in range(net.layer_count - 1, -1, -1):
        params = net.layers[li]
        d = net.layer_input_dim(li)
        dW = {g: np.zeros((hidden, d + hidden)) for g in GATES}
        db = {g: np.zeros(hidden) for g in GATES}
        d_below = np.zeros((length, batch, d)) if li > 0 else None
        dh_next = np.zeros((batch, hidden))
        dc_next = np.zeros((batch, hidden))
        for t in range(length - 1, -1, -1):
            cache = caches[li][t]
            dh = d_above[t] + dh_next
            do = dh * cache.tanh_c
            dc = dh * cache.o * (1.0 - cache.tanh_c ** 2) + dc_next
            df = dc * cache.c_prev
            di = dc * cache.z
            dz = dc * cache.i
            dc_next = dc * cache.f
            dpre = {
                "i": di * cache.i * (1.0 - cache.i),
                "f": df * cache.f * (1.0 - cache.f),
                "o": do * cache.o * (1.0 - cache.o),
                "c": dz * (1.0 - cache.z ** 2),
            }
            for g in GATES:
                dW[g] += dpre[g].T @ cache.a
                db[g] += np.sum(dpre[g], axis=0)
            da = (
                dpre["i"] @ params.W_i
                + dpre["f"] @ params.W_f
                + dpre["o"] @ params.W_o
                + dpre["c"] @ params.W_c
            )
            if li > 0:
                d_below[t] = da[:, :d]
            dh_next = da[:, d:]
        for g in GATES:
            dW[g] = np.where(params.mask.gates[g] == 1.0, dW[g], 0.0)
        layer_grads[li] = LayerGrads(
            dW_i=dW["i"], dW_f=dW["f"], dW_o=dW["o"], dW_c=dW["c"],
            db_i=db["i"], db_f=db["f"], db_o=db["o"], db_c=db["c"],
        )
        if li > 0:
            d_above = d_below
    return Gradients(layers=layer_grads, d_head_w=d_head_w, d_head_b=d_head_b)


def backward_sequence(net: StackedNetwork, trace: ForwardTrace, seq,
                      target: float) -> Gradients:
    """Gradients of (prediction - target)^2 for a single window."""
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    caches = trace.caches
    if len(caches) != net.layer_count or len(caches[0]) != x.shape[0]:
        raise ValueError(
            f"trace covers {len(caches)} layers x {len(caches[0])} steps, "
            f"window needs {net.layer_count} x {x.shape[0]}"
        )
    if caches[0][0].a.shape[0] != 1:
        raise ValueError("trace was produced for a batch, not a single window")
    return backward_batch(
        net, caches, x[None, :, :], trace.predictions, np.asarray([target])
    )


def clip_gradients(grads: Gradients, clip_norm: float) -> float:
    """Scale gradients so the global norm is at most clip_norm; returns the pre-clip norm."""
    norm = grads.global_norm()
    if norm > clip_norm:
        grads.scale(clip_norm / norm)
    return norm


def _net_param_arrays(net: StackedNetwork):
    for params in net.layers:
        for g in GATES:
            yield params.weight(g)
        for g in GATES:
            yield params.bias(g)
    yield net.head_w


class AdamOptimizer:
    """Adam with bias-corrected moments over the network's parameter list."""

    def __init__(self, net: StackedNetwork, cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = [np.zeros_like(p) for p in _net_param_arrays(net)]
        self.v = [np.zeros_like(p) for p in _net_param_arrays(net)]
        self.m_b = 0.0
        self.v_b = 0.0

    def step(self, net: StackedNetwork, grads: Gradients) -> None:
        cfg = self.cfg
        self.t += 1
        corr1 = 1.0 - cfg.beta1 ** self.t
        corr2 = 1.0 - cfg.beta2 ** self.t
        for k, (p, g) in enumerate(zip(_net_param_arrays(net), grads.arrays())):
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * (g * g)
            m_hat = self.m[k] / corr1
            v_hat = self.v[k] / corr2
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        g = grads.d_head_b
        self.m_b = cfg.beta1 * self.m_b + (1.0 - cfg.beta1) * g
        self.v_b = cfg.beta2 * self.v_b + (1.0 - cfg.beta2) * (g * g)
        net.head_b -= cfg.learning_rate * (self.m_b / corr1) / (
            math.sqrt(self.v_b / corr2) + cfg.epsilon
        )


def train(net: StackedNetwork, dataset, cfg: TrainConfig):
    """Train in place with shuffled mini-batches of Adam updates.

    Returns (net, loss_history); the history holds the mean training MSE of
    each epoch, measured on the predictions made before each update.  A
    non-finite batch loss aborts with the offending epoch and batch named.
    """
    inputs = dataset.inputs
    targets = dataset.targets
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("dataset is empty")
    optimizer = AdamOptimizer(net, cfg)
    loss_history = []
    for epoch in range(cfg.epochs):
        shuffle_rng = np.random.Generator(
            np.random.PCG64(derive_seed(cfg.seed, "shuffle", epoch))
        )
        order = shuffle_rng.permutation(n)
        epoch_sq_err = 0.0
        for start in range(0, n, cfg.batch_size):
            batch_idx = order[start:start + cfg.batch_size]
            xb = inputs[batch_idx]
            yb = targets[batch_idx]
            preds, caches = forward_batch(net, xb, want_trace=True)
            with np.errstate(over="ignore"):  # detected below, not a fault
                batch_loss = float(np.mean((preds - yb) ** 2))
            if not math.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}"
                )
            epoch_sq_err += batch_loss * len(batch_idx)
            grads = backward_batch(net, caches, xb, preds, yb)
            clip_gradients(grads, cfg.clip_norm)
            optimizer.step(net, grads)
            for params in net.layers:
                apply_mask(params)
        loss_history.append(epoch_sq_err / n)
    return net, loss_history


_LD = np.longdouble


def _forward_extended(net: StackedNetwork, x: np.ndarray) -> np.longdouble:
    """Forecast one window in extended precision.

    A second, deliberately plain implementation of the stack used only by
    the finite-difference oracle.  Running the oracle's loss evaluations in
    80-bit arithmetic keeps its own roundoff (~ulp(pred)/step) far below
    the comparison threshold, which double precision cannot manage for the
    tiny gradients of early-timestep recurrent weights.
    """
    h = [np.zeros(net.hidden_dim, dtype=_LD) for _ in net.layers]
    c = [np.zeros(net.hidden_dim, dtype=_LD) for _ in net.layers]
    for t in range(x.shape[0]):
        inp = x[t].astype(_LD)
        for li, params in enumerate(net.layers):
            a = np.concatenate([inp, h[li]])
            pre = {
                g: params.weight(g).astype(_LD) @ a + params.bias(g).astype(_LD)
                for g in GATES
            }
            i = 1.0 / (1.0 + np.exp(-pre["i"]))
            f = 1.0 / (1.0 + np.exp(-pre["f"]))
            o = 1.0 / (1.0 + np.exp(-pre["o"]))
            z = np.tanh(pre["c"])
            c[li] = f * c[li] + i * z
            h[li] = o * np.tanh(c[li])
            inp = h[li]
    return net.head_w.astype(_LD) @ h[-1] + _LD(net.head_b)


def grad_check(net: StackedNetwork, seq, target: float,
               perturbation: float = 1e-5) -> float:
    """Max relative error of backprop gradients against central differences.

    Checks every unmasked parameter, including biases and the readout.
    Relative error is |a - b| / max(|a|, |b|, 1e-8).  The differenced
    losses come from ``_forward_extended`` and are divided by the exact
    spacing of the perturbed double-precision parameter values.
    """
    if perturbation <= 0:
        raise ValueError("perturbation must be positive")
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    _, trace = forward_sequence(net, x)
    grads = backward_sequence(net, trace, x, target)
    target_ld = _LD(target)

    def loss_at(delta_arr: np.ndarray, index, value: float) -> np.longdouble:
        orig = delta_arr[index]
        delta_arr[index] = value
        p = _forward_extended(net, x)
        delta_arr[index] = orig
        return (p - target_ld) ** 2

    def central_diff(arr: np.ndarray, index) -> float:
        orig = float(arr[index])
        up_at = np.float64(orig + perturbation)
        down_at = np.float64(orig - perturbation)
        up = loss_at(arr, index, up_at)
        down = loss_at(arr, index, down_at)
        return float((up - down) / (_LD(up_at) - _LD(down_at)))

    worst = 0.0

    def compare(analytic: float, numeric: float) -> None:
        nonlocal worst
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, err)

    for li, params in enumerate(net.layers):
        lg = grads.layers[li]
        for g in GATES:
            w = params.weight(g)
            mask = params.mask.gates[g]
            for r in range(w.shape[0]):
                for k in range(w.shape[1]):
                    if mask[r, k] == 0.0:
                        continue
                    compare(lg.weight(g)[r, k], central_diff(w, (r, k)))
            b = params.bias(g)
            for r in range(b.shape[0]):
                compare(lg.bias(g)[r], central_diff(b, (r,)))
    for k in range(net.head_w.shape[0]):
        compare(grads.d_head_w[k], central_diff(net.head_w, (k,)))

    orig = float(net.head_b)
    up_at = np.float64(orig + perturbation)
    down_at = np.float64(orig - perturbation)
    net.head_b = float(up_at)
    up = (_forward_extended(net, x) - target_ld) ** 2
    net.head_b = float(down_at)
    down = (_forward_extended(net, x) - target_ld) ** 2
    net.head_b = orig
    compare(grads.d_head_b, float((up - down) / (_LD(up_at) - _LD(down_at))))
    return worst
