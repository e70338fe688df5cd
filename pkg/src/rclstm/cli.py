"""Command-line entry point.

Subcommands map to the experiment modes:

    rclstm train              train one model, write checkpoint + predictions
    rclstm predict            load a checkpoint, predict over a data source
    rclstm sweep-connectivity error vs. fraction of surviving connections
    rclstm sweep-trainsize    error vs. number of training windows
    rclstm sweep-seqlen       error vs. input window length

All runs are deterministic given --seed.  Use --data <csv> for a real
series (one value per line) or --synthetic (default) for the generated one.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint
from .data import Series, SplitSpec, load_csv, make_windows, split, synth_traffic
from .experiments import (
    DEFAULT_SEQLENS,
    DEFAULT_TRAINSIZES,
    CONNECTIVITY_SWEEP_REQUIRED,
    ExperimentConfig,
    run_sweep,
    run_train_predict,
    write_predictions_csv,
)
from .metrics import evaluate
from .seeding import derive_seed
from .training import TrainConfig


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", metavar="PATH", default=None,
                   help="CSV series, one value per line (default: synthetic)")
    p.add_argument("--synthetic", action="store_true",
                   help="use the synthetic generator (default when --data is absent)")
    p.add_argument("--series-length", type=int, default=7289,
                   help="synthetic series length")
    p.add_argument("--noise", type=float, default=0.5,
                   help="synthetic noise standard deviation")
    p.add_argument("--hidden", type=int, default=32, help="hidden units per layer")
    p.add_argument("--layers", type=int, default=3, help="stacked layer count")
    p.add_argument("--window", type=int, default=10, help="input window length")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--test-size", type=int, default=1000,
                   help="held-out windows at the end of the series")
    p.add_argument("--train-size", type=int, default=None,
                   help="training windows (default: all remaining)")
    p.add_argument("--out", metavar="DIR", default="results", help="output directory")


def _add_sweep(p: argparse.ArgumentParser) -> None:
    _add_common(p)
    p.add_argument("--trials", type=int, default=5, help="seeded trials per sweep point")
    p.add_argument("--workers", type=int, default=1, help="parallel trial processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rclstm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one model and checkpoint it")
    _add_common(p_train)
    p_train.add_argument("--connectivity", type=float, default=0.35,
                         help="fraction of surviving connections")

    p_pred = sub.add_parser("predict", help="predict from a saved checkpoint")
    p_pred.add_argument("--checkpoint", required=True, metavar="PATH")
    p_pred.add_argument("--data", metavar="PATH", default=None)
    p_pred.add_argument("--synthetic", action="store_true")
    p_pred.add_argument("--series-length", type=int, default=7289)
    p_pred.add_argument("--noise", type=float, default=0.5)
    p_pred.add_argument("--seed", type=int, default=0)
    p_pred.add_argument("--test-size", type=int, default=1000)
    p_pred.add_argument("--out", metavar="DIR", default="results")

    p_conn = sub.add_parser("sweep-connectivity", help="error vs. connectivity")
    _add_sweep(p_conn)
    p_conn.add_argument("--connectivities", type=float, nargs="+",
                        default=list(CONNECTIVITY_SWEEP_REQUIRED))

    p_size = sub.add_parser("sweep-trainsize", help="error vs. training set size")
    _add_sweep(p_size)
    p_size.add_argument("--trainsizes", type=int, nargs="+",
                        default=list(DEFAULT_TRAINSIZES))

    p_len = sub.add_parser("sweep-seqlen", help="error vs. window length")
    _add_sweep(p_len)
    p_len.add_argument("--seqlens", type=int, nargs="+", default=list(DEFAULT_SEQLENS))

    return parser


def _experiment_config(args, mode: str) -> ExperimentConfig:
    return ExperimentConfig(
        mode=mode,
        data_source=args.data if args.data else "synthetic",
        connectivity_list=tuple(getattr(args, "connectivities", CONNECTIVITY_SWEEP_REQUIRED)),
        trainsize_list=tuple(getattr(args, "trainsizes", DEFAULT_TRAINSIZES)),
        seqlen_list=tuple(getattr(args, "seqlens", DEFAULT_SEQLENS)),
        trials_per_point=getattr(args, "trials", 1),
        train=TrainConfig(
            learning_rate=args.lr,
            batch_size=args.batch_size,
            epochs=args.epochs,
        ),
        output_dir=args.out,
        master_seed=args.seed,
        series_length=args.series_length,
        noise_std=args.noise,
        layer_count=args.layers,
        hidden_dim=args.hidden,
        window=args.window,
        test_size=args.test_size,
        train_size=args.train_size,
        connectivity=getattr(args, "connectivity", 0.35),
        workers=getattr(args, "workers", 1),
    )


def _cmd_train(args) -> int:
    cfg = _experiment_config(args, "train")
    ckpt, preds, report = run_train_predict(cfg)
    print(f"checkpoint: {ckpt}")
    print(f"predictions: {preds}")
    print(f"test mse={report.mse:.6f} mae={report.mae:.6f} over {report.n} windows")
    return 0


def _cmd_predict(args) -> int:
    net, mu, sigma, meta = load_checkpoint(args.checkpoint)
    window = int(meta.get("window", 10))
    if args.data:
        raw = load_csv(args.data)
    else:
        raw = synth_traffic(args.series_length, derive_seed(args.seed, "data"), args.noise)
    # reuse the checkpoint's normalization so raw units stay comparable
    raw_arr = np.asarray(raw, dtype=np.float64)
    series = Series(values=raw_arr, mu=mu, sigma=sigma,
                    normalized=(raw_arr - mu) / sigma)
    windows = make_windows(series, window)
    _, test_set = split(windows, SplitSpec(test_size=args.test_size))
    report = evaluate(net, test_set)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pred_path = out / "pred_vs_actual.csv"
    write_predictions_csv(pred_path, series, report)
    print(f"predictions: {pred_path}")
    print(f"test mse={report.mse:.6f} mae={report.mae:.6f} over {report.n} windows")
    return 0


def _cmd_sweep(args, mode: str) -> int:
    cfg = _experiment_config(args, mode)
    result = run_sweep(cfg)
    failed = [r for r in result.rows if r.error]
    print(f"wrote {len(result.rows)} rows to {Path(cfg.output_dir) / 'results.csv'}")
    if failed:
        print(f"{len(failed)} trial(s) diverged; see manifest.json", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "predict":
            return _cmd_predict(args)
        return _cmd_sweep(args, args.command)
    except (ValueError, CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
