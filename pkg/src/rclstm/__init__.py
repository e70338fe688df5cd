"""Randomly connected LSTM forecaster with a reproducible experiment harness."""

__version__ = "0.1.0"

from .cell import (
    CellParams,
    CellState,
    ConnectivityMask,
    MaskSpec,
    apply_mask,
    forward_step,
    generate_mask,
    init_params,
)
from .data import (
    Series,
    SplitSpec,
    WindowedDataset,
    load_csv,
    make_windows,
    normalize,
    split,
    synth_traffic,
)
from .metrics import EvalReport, evaluate, mae, mse
from .network import ForwardTrace, StackedNetwork, build_network, forward_sequence
from .training import (
    Gradients,
    TrainConfig,
    TrainingDivergedError,
    backward_sequence,
    grad_check,
    loss_mse,
    train,
)

__all__ = [
    "CellParams", "CellState", "ConnectivityMask", "MaskSpec",
    "apply_mask", "forward_step", "generate_mask", "init_params",
    "Series", "SplitSpec", "WindowedDataset",
    "load_csv", "make_windows", "normalize", "split", "synth_traffic",
    "EvalReport", "evaluate", "mae", "mse",
    "ForwardTrace", "StackedNetwork", "build_network", "forward_sequence",
    "Gradients", "TrainConfig", "TrainingDivergedError",
    "backward_sequence", "grad_check", "loss_mse", "train",
    "__version__",
]
