"""Series ingestion, z-score normalization, windowing, and splitting.

The pipeline mirrors how the traffic series is prepared: normalize the
whole series first (mean 0, population std 1), then slide a length-L window
over it so each window predicts the value right after it, then split
chronologically with the test block at the end.  Normalizing before the
split leaks a little test information into mu/sigma; that is deliberate,
and documented, to keep the preprocessing faithful.

When no real CSV is available, ``synth_traffic`` stands in with a periodic
series at 15-minute resolution: a daily cycle (96 steps), a slower 5-day
cycle, and Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WINDOW = 10
DAILY_PERIOD = 96  # 15-minute slots per day


@dataclass
class Series:
    """Raw values plus the normalization statistics that produced them."""

    values: np.ndarray
    mu: float
    sigma: float
    normalized: np.ndarray

    def denormalize(self, z) -> np.ndarray:
        return np.asarray(z) * self.sigma + self.mu


@dataclass
class WindowedDataset:
    inputs: np.ndarray   # (n, L, 1)
    targets: np.ndarray  # (n,)
    window: int

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass
class SplitSpec:
    """Chronological split: the last test_size windows are held out.

    train_size=None keeps every remaining window; otherwise the train block
    is the train_size windows immediately before the test block.
    """

    test_size: int = 1000
    train_size: int | None = None

    def __post_init__(self):
        if self.test_size < 1:
            raise ValueError("test_size must be positive")
        if self.train_size is not None and self.train_size < 1:
            raise ValueError("train_size must be positive or None")


def load_csv(path) -> list[float]:
    """Read one numeric value per line, preserving file order.

    A single non-numeric first line is treated as a header and skipped.
    Any other non-numeric or blank-interior line is an error naming the row.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    values = []
    start = 0
    if lines:
        try:
            float(lines[0].split(",")[0])
        except ValueError:
            start = 1  # header row
    for lineno, line in enumerate(lines[start:], start=start + 1):
        text = line.split(",")[0].strip()
        if not text:
            if lineno == len(lines):
                continue  # trailing blank line
            raise ValueError(f"blank value at row {lineno} of {path}")
        try:
            values.append(float(text))
        except ValueError:
            raise ValueError(f"malformed value {text!r} at row {lineno} of {path}") from None
    if not values:
        raise ValueError(f"empty series in {path}")
    return values


def synth_traffic(n: int, seed: int, noise_std: float = 0.5) -> list[float]:
    """Generate n steps of synthetic traffic at 15-minute resolution.

    value[t] = 10 + 4 sin(2 pi t / 96) + 1.5 sin(2 pi t / 480) + N(0, noise_std)
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.arange(n, dtype=np.float64)
    base = (
        10.0
        + 4.0 * np.sin(2.0 * np.pi * t / DAILY_PERIOD)
        + 1.5 * np.sin(2.0 * np.pi * t / (5 * DAILY_PERIOD))
    )
    if noise_std > 0.0:
        rng = np.random.Generator(np.random.PCG64(seed))
        base = base + rng.normal(0.0, noise_std, size=n)
    return base.tolist()


def normalize(values) -> Series:
    """Z-score the series: (x - mean) / population std."""
    raw = np.asarray(values, dtype=np.float64)
    if raw.ndim != 1 or raw.shape[0] < 2:
        raise ValueError("need a 1-D series of at least 2 values")
    mu = float(np.mean(raw))
    sigma = float(np.std(raw))
    if sigma == 0.0:
        raise ValueError("degenerate series: standard deviation is zero")
    return Series(values=raw, mu=mu, sigma=sigma, normalized=(raw - mu) / sigma)


def make_windows(series: Series, window: int) -> WindowedDataset:
    """Slide a length-``window`` window; each window's target is the next value."""
    n = series.normalized.shape[0]
    if window < 1:
        raise ValueError("window length must be >= 1")
    if window >= n:
        raise ValueError(f"window length {window} must be shorter than the series ({n})")
    count = n - window
    idx = np.arange(window)[None, :] + np.arange(count)[:, None]
    inputs = series.normalized[idx][:, :, None]
    targets = series.normalized[window:]
    return WindowedDataset(inputs=inputs, targets=targets.copy(), window=window)


def split(dataset: WindowedDataset, spec: SplitSpec):
    """Chronological (train, test) split per ``SplitSpec``."""
    total = len(dataset)
    if spec.test_size >= total:
        raise ValueError(
            f"test_size {spec.test_size} leaves no training windows (total {total})"
        )
    train_size = spec.train_size
    if train_size is None:
        train_size = total - spec.test_size
    if train_size + spec.test_size > total:
        raise ValueError(
            f"train_size {train_size} + test_size {spec.test_size} exceeds {total} windows"
        )
    test_start = total - spec.test_size
    train_start = test_start - train_size
    train = WindowedDataset(
        inputs=dataset.inputs[train_start:test_start],
        targets=dataset.targets[train_start:test_start],
        window=dataset.window,
    )
    test = WindowedDataset(
        inputs=dataset.inputs[test_start:],
        targets=dataset.targets[test_start:],
        window=dataset.window,
    )
    return train, test
