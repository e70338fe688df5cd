"""Double-precision vector/matrix primitives and gate activations.

Vectors are 1-D float64 numpy arrays, matrices 2-D row-major float64 arrays;
``vec`` and ``mat`` build validated instances.  Everything here is a pure
function of its inputs, so repeated calls are bit-identical.
"""

from __future__ import annotations

import numpy as np

__all__ = ["vec", "mat", "sigmoid", "tanh_act", "matvec", "hadamard", "concat"]


def vec(values) -> np.ndarray:
    """Build a 1-D float64 vector and check all entries are finite."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def mat(values) -> np.ndarray:
    """Build a 2-D row-major float64 matrix and check all entries are finite."""
    m = np.asarray(values, dtype=np.float64, order="C")
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def sigmoid(x):
    """Logistic function 1/(1+e^-x), overflow-safe for |x| up to at least 700.

    Works elementwise on arrays; scalars come back as Python floats.
    """
    x = np.asarray(x, dtype=np.float64)
    # exp of a non-positive argument never overflows
    z = np.exp(-np.abs(x))
    out = np.where(x >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))
    if out.ndim == 0:
        return float(out)
    return out


def tanh_act(x):
    """Hyperbolic tangent expressed as 2*sigmoid(2x) - 1."""
    x = np.asarray(x, dtype=np.float64)
    out = 2.0 * sigmoid(2.0 * x) - 1.0
    if np.ndim(out) == 0:
        return float(out)
    return out


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product with an explicit shape check."""
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ValueError(
            f"matvec shape mismatch: matrix {m.shape} vs vector {v.shape}"
        )
    return np.dot(m, v)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two equal-length vectors."""
    if a.shape != b.shape:
        raise ValueError(f"hadamard shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def concat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Concatenate two vectors, a's entries first."""
    return np.concatenate([a, b])
