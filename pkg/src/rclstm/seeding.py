"""Deterministic seed derivation.

Every random draw in this package comes from a numpy PCG64 generator whose
seed is derived from a single master seed plus a list of stream labels
(strings or integers).  Derivation is a splitmix64-style mix over an FNV-1a
hash of the labels, so any (mode, sweep value, trial) tuple maps to a stable
64-bit seed independent of draw order elsewhere.  This is what makes trials
independently re-runnable and sweeps parallelizable.
"""

from __future__ import annotations

import struct

_MASK64 = 0xFFFFFFFFFFFFFFFF
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a(data: bytes, h: int) -> int:
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *labels) -> int:
    """Mix ``master`` with string/int/float labels into a new 64-bit seed.

    Floats are hashed by their IEEE-754 bit pattern so e.g. a connectivity
    value labels the stream exactly, not via repr rounding.
    """
    h = _fnv1a(struct.pack("<Q", master & _MASK64), _FNV_OFFSET)
    for label in labels:
        if isinstance(label, bool):
            raise TypeError("bool is not a valid seed label")
        if isinstance(label, str):
            h = _fnv1a(b"s" + label.encode("utf-8"), h)
        elif isinstance(label, int):
            h = _fnv1a(b"i" + struct.pack("<q", label), h)
        elif isinstance(label, float):
            h = _fnv1a(b"f" + struct.pack("<d", label), h)
        else:
            raise TypeError(f"unsupported seed label type: {type(label)!r}")
    return _splitmix64(h)
