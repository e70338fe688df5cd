"""Experiment orchestration: seeded sweeps, result files, train/predict runs.

Each trial is fully self-contained: its seed is derived from
(master seed, mode, sweep value, trial index), it builds its own network and
training stream, and it shares nothing mutable with other trials.  That
makes sweeps resumable trial by trial and safe to run across processes; a
rerun with the same master seed reproduces every metric exactly.

The same trial seed is reused across connectivity arms at a fixed sweep
point, so arm comparisons (e.g. 35% vs 100%) are paired: the sparser mask
is a subset of the denser one and the surviving weights start identical.

Result rows go to ``results.csv`` with a fixed header; a ``manifest.json``
records the full configuration and per-row provenance.  A diverged trial
writes NaN metrics and the sweep continues.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

from . import __version__
from .checkpoint import config_digest, save_checkpoint
from .data import SplitSpec, load_csv, make_windows, normalize, split, synth_traffic
from .metrics import evaluate
from .network import build_network
from .seeding import derive_seed
from .training import TrainConfig, TrainingDivergedError, train

RESULT_COLUMNS = (
    "mode", "sweep_value", "trial_seed", "realized_connectivity",
    "mse", "mae", "train_seconds", "final_train_loss",
)

CONNECTIVITY_SWEEP_REQUIRED = (0.1, 0.2, 0.35, 0.5, 0.75, 1.0)
DEFAULT_TRAINSIZES = (500, 1000, 2000, 4000, 6000)
DEFAULT_SEQLENS = (5, 10, 20, 50, 100)
SWEEP_ARMS = (0.35, 0.5, 1.0)

MODES = ("train", "predict", "sweep-connectivity", "sweep-trainsize", "sweep-seqlen")


@dataclass
class ExperimentConfig:
    mode: str
    data_source: str = "synthetic"
    connectivity_list: tuple = CONNECTIVITY_SWEEP_REQUIRED
    trainsize_list: tuple = DEFAULT_TRAINSIZES
    seqlen_list: tuple = DEFAULT_SEQLENS
    trials_per_point: int = 5
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "results"
    master_seed: int = 0
    series_length: int = 7289
    noise_std: float = 0.5
    layer_count: int = 3
    hidden_dim: int = 32
    window: int = 10
    test_size: int = 1000
    train_size: int | None = None
    connectivity: float = 0.35  # train/predict modes
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be positive")
        if any(not 0.0 <= c <= 1.0 for c in self.connectivity_list):
            raise ValueError("connectivity values must lie in [0, 1]")
        if self.mode == "sweep-connectivity":
            missing = [c for c in CONNECTIVITY_SWEEP_REQUIRED
                       if not any(math.isclose(c, v) for v in self.connectivity_list)]
            if missing:
                raise ValueError(
                    f"connectivity sweep must cover {CONNECTIVITY_SWEEP_REQUIRED}, missing {missing}"
                )
        if self.mode == "sweep-trainsize":
            if list(self.trainsize_list) != sorted(self.trainsize_list):
                raise ValueError("trainsize_list must be ascending")
        if not self.seqlen_list or not self.trainsize_list or not self.connectivity_list:
            raise ValueError("sweep lists must be non-empty")

    def public_dict(self) -> dict:
        d = asdict(self)
        d["connectivity_list"] = list(self.connectivity_list)
        d["trainsize_list"] = list(self.trainsize_list)
        d["seqlen_list"] = list(self.seqlen_list)
        return d


@dataclass
class ResultRow:
    mode: str
    sweep_value: float
    connectivity_target: float
    trial_index: int
    trial_seed: int
    realized_connectivity: float
    mse: float
    mae: float
    train_seconds: float
    final_train_loss: float
    error: str | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list

    def median_mse(self, sweep_value: float, connectivity: float) -> float:
        vals = [r.mse for r in self.rows
                if math.isclose(r.sweep_value, sweep_value)
                and math.isclose(r.connectivity_target, connectivity)
                and math.isfinite(r.mse)]
        if not vals:
            raise ValueError(f"no finished rows at ({sweep_value}, {connectivity})")
        return statistics.median(vals)


def _mode_id(mode: str) -> str:
    return mode


def load_series(cfg: ExperimentConfig):
    """Build the normalized series for this run (CSV file or synthetic)."""
    if cfg.data_source == "synthetic":
        raw = synth_traffic(
            cfg.series_length, derive_seed(cfg.master_seed, "data"), cfg.noise_std
        )
    else:
        raw = load_csv(cfg.data_source)
    return normalize(raw)


def trial_seed_for(cfg: ExperimentConfig, mode: str, sweep_value: float,
                   trial_index: int) -> int:
    return derive_seed(cfg.master_seed, _mode_id(mode), float(sweep_value), trial_index)


def _run_trial(cfg: ExperimentConfig, mode: str, sweep_value: float,
               connectivity: float, trial_index: int, window: int,
               train_size: int | None) -> ResultRow:
    series = load_series(cfg)
    windows = make_windows(series, window)
    train_set, test_set = split(
        windows, SplitSpec(test_size=cfg.test_size, train_size=train_size)
    )
    seed = trial_seed_for(cfg, mode, sweep_value, trial_index)
    net = build_network(
        layer_count=cfg.layer_count,
        input_dim=1,
        hidden_dim=cfg.hidden_dim,
        connectivity=connectivity,
        seed=seed,
    )
    realized = sum(p.mask.ones_count() for p in net.layers) / sum(
        4.0 * p.hidden_dim * (p.input_dim + p.hidden_dim) for p in net.layers
    )
    tcfg = TrainConfig(
        learning_rate=cfg.train.learning_rate,
        beta1=cfg.train.beta1,
        beta2=cfg.train.beta2,
        epsilon=cfg.train.epsilon,
        batch_size=cfg.train.batch_size,
        epochs=cfg.train.epochs,
        clip_norm=cfg.train.clip_norm,
        seed=derive_seed(seed, "train"),
    )
    start = time.perf_counter()
    try:
        _, history = train(net, train_set, tcfg)
    except TrainingDivergedError as exc:
        return ResultRow(
            mode=mode, sweep_value=sweep_value, connectivity_target=connectivity,
            trial_index=trial_index, trial_seed=seed, realized_connectivity=realized,
            mse=float("nan"), mae=float("nan"),
            train_seconds=time.perf_counter() - start,
            final_train_loss=float("nan"), error=str(exc),
        )
    elapsed = time.perf_counter() - start
    report = evaluate(net, test_set)
    return ResultRow(
        mode=mode, sweep_value=sweep_value, connectivity_target=connectivity,
        trial_index=trial_index, trial_seed=seed, realized_connectivity=realized,
        mse=report.mse, mae=report.mae, train_seconds=elapsed,
        final_train_loss=history[-1], error=None,
    )


def _trial_worker(args) -> ResultRow:
    cfg_dict, mode, sweep_value, connectivity, trial_index, window, train_size = args
    cfg = _config_from_dict(cfg_dict)
    return _run_trial(cfg, mode, sweep_value, connectivity, trial_index, window, train_size)


def _config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    d["train"] = TrainConfig(**d["train"])
    d["connectivity_list"] = tuple(d["connectivity_list"])
    d["trainsize_list"] = tuple(d["trainsize_list"])
    d["seqlen_list"] = tuple(d["seqlen_list"])
    return ExperimentConfig(**d)


def _run_specs(cfg: ExperimentConfig, specs: list) -> list:
    """Run trial specs in order, optionally across processes."""
    if cfg.workers > 1:
        payload = [(cfg.public_dict(),) + spec for spec in specs]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_trial_worker, payload))
    return [_run_trial(cfg, *spec) for spec in specs]


def run_sweep_connectivity(cfg: ExperimentConfig) -> ExperimentResult:
    """Train/evaluate at each connectivity level, several seeded trials each."""
    specs = []
    for conn in cfg.connectivity_list:
        for trial in range(cfg.trials_per_point):
            specs.append(("sweep-connectivity", float(conn), float(conn), trial,
                          cfg.window, cfg.train_size))
    return ExperimentResult(config=cfg, rows=_run_specs(cfg, specs))


def run_sweep_trainsize(cfg: ExperimentConfig) -> ExperimentResult:
    """Sweep the number of training windows for each connectivity arm."""
    specs = []
    for size in cfg.trainsize_list:
        for conn in SWEEP_ARMS:
            for trial in range(cfg.trials_per_point):
                specs.append(("sweep-trainsize", float(size), float(conn), trial,
                              cfg.window, int(size)))
    return ExperimentResult(config=cfg, rows=_run_specs(cfg, specs))


def run_sweep_seqlen(cfg: ExperimentConfig) -> ExperimentResult:
    """Sweep the input window length for each connectivity arm."""
    specs = []
    for length in cfg.seqlen_list:
        for conn in SWEEP_ARMS:
            for trial in range(cfg.trials_per_point):
                specs.append(("sweep-seqlen", float(length), float(conn), trial,
                              int(length), cfg.train_size))
    return ExperimentResult(config=cfg, rows=_run_specs(cfg, specs))


def run_train_predict(cfg: ExperimentConfig, out_dir=None):
    """Train one model, checkpoint it, and dump actual-vs-predicted values.

    Returns (checkpoint path, prediction CSV path, evaluation report).
    Predictions in the CSV are denormalized back to raw units.
    """
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = load_series(cfg)
    windows = make_windows(series, cfg.window)
    train_set, test_set = split(
        windows, SplitSpec(test_size=cfg.test_size, train_size=cfg.train_size)
    )
    seed = trial_seed_for(cfg, "train", cfg.connectivity, 0)
    net = build_network(cfg.layer_count, 1, cfg.hidden_dim, cfg.connectivity, seed)
    tcfg = TrainConfig(
        learning_rate=cfg.train.learning_rate,
        beta1=cfg.train.beta1,
        beta2=cfg.train.beta2,
        epsilon=cfg.train.epsilon,
        batch_size=cfg.train.batch_size,
        epochs=cfg.train.epochs,
        clip_norm=cfg.train.clip_norm,
        seed=derive_seed(seed, "train"),
    )
    train(net, train_set, tcfg)
    report = evaluate(net, test_set)
    ckpt_path = out / "checkpoint.json"
    meta = {
        "window": cfg.window,
        "connectivity": cfg.connectivity,
        "master_seed": cfg.master_seed,
        "trial_seed": seed,
        "config_digest": config_digest(cfg.public_dict()),
    }
    save_checkpoint(net, series.mu, series.sigma, ckpt_path, meta=meta)
    pred_path = out / "pred_vs_actual.csv"
    write_predictions_csv(pred_path, series, report)
    return ckpt_path, pred_path, report


def write_predictions_csv(path, series, report) -> None:
    """Two columns, denormalized: actual, predicted."""
    actual = series.denormalize(report.targets)
    predicted = series.denormalize(report.predictions)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["actual", "predicted"])
        for a, p in zip(actual, predicted):
            writer.writerow([repr(float(a)), repr(float(p))])


def write_results_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in result.rows:
            writer.writerow([
                row.mode,
                repr(float(row.sweep_value)),
                row.trial_seed,
                repr(float(row.realized_connectivity)),
                repr(float(row.mse)),
                repr(float(row.mae)),
                repr(float(row.train_seconds)),
                repr(float(row.final_train_loss)),
            ])


def write_manifest(result: ExperimentResult, path) -> None:
    doc = {
        "package_version": __version__,
        "config": result.config.public_dict(),
        "rows": [
            {
                "index": i,
                "mode": r.mode,
                "sweep_value": r.sweep_value,
                "connectivity_target": r.connectivity_target,
                "trial_index": r.trial_index,
                "trial_seed": r.trial_seed,
                "error": r.error,
            }
            for i, r in enumerate(result.rows)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def run_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Dispatch on mode, run the sweep, and write result files."""
    runners = {
        "sweep-connectivity": run_sweep_connectivity,
        "sweep-trainsize": run_sweep_trainsize,
        "sweep-seqlen": run_sweep_seqlen,
    }
    if cfg.mode not in runners:
        raise ValueError(f"mode {cfg.mode!r} is not a sweep")
    result = runners[cfg.mode](cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(result, out / "results.csv")
    write_manifest(result, out / "manifest.json")
    return result
