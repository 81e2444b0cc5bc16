from .binning import LevelScheme, oversample, oversample_round_robin, quantile_bin
from .network import (ModelParams, forward, init_params, load_model, predict,
                      save_model, softmax)
from .training import TrainConfig, TrainHistory, evaluate, train
from .attribution import completeness_gap, integrated_gradients
from .selection import ChartFeatureDataset, SelectionResult, greedy_select

__all__ = [
    "LevelScheme", "oversample", "oversample_round_robin", "quantile_bin",
    "ModelParams", "forward", "init_params", "load_model", "predict",
    "save_model", "softmax",
    "TrainConfig", "TrainHistory", "evaluate", "train",
    "completeness_gap", "integrated_gradients",
    "ChartFeatureDataset", "SelectionResult", "greedy_select",
]
