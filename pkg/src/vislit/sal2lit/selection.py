"""Greedy forward selection of the most literacy-predictive charts.

Each candidate subset is evaluated by retraining the predictor from scratch
on features averaged over the subset, so the input dimension stays fixed and
the comparison is unbiased by warm starts.
"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..features import FeatureNormalizer
from .binning import oversample_round_robin
from .training import TrainConfig, evaluate, train


@dataclass
class ChartFeatureDataset:
    """Per-chart feature matrices for fixed train/test participant rows."""
    chart_ids: List[str]
    train_features: Dict[str, np.ndarray]  # chart -> (n_train, 24)
    test_features: Dict[str, np.ndarray]   # chart -> (n_test, 24)
    train_labels3: List[np.ndarray]
    test_labels3: List[np.ndarray]

    def subset_matrices(self, subset):
        tr = np.nanmean(np.stack([self.train_features[c] for c in subset]), axis=0)
        te = np.nanmean(np.stack([self.test_features[c] for c in subset]), axis=0)
        return tr, te


@dataclass
class SelectionResult:
    charts: List[str]
    accuracy_curve: List[float]          # weighted accuracy after each pick
    per_head_curve: List[List[float]] = field(default_factory=list)


def _subset_accuracy(dataset, subset, weights, cfg, n_levels, balance):
    tr_raw, te_raw = dataset.subset_matrices(subset)
    norm = FeatureNormalizer().fit(tr_raw)
    tr = norm.transform(tr_raw, is_train=True)
    te = norm.transform(te_raw)
    labels3 = dataset.train_labels3
    if balance:
        idx = oversample_round_robin(labels3, cfg.seed)
        tr = tr[idx]
        labels3 = [l[idx] for l in labels3]
    params, _ = train(tr, labels3, cfg, n_levels=n_levels)
    accs, _ = evaluate(params, te, dataset.test_labels3)
    w = np.asarray(weights, dtype=np.float64)
    return float(np.dot(w, accs) / w.sum()), accs


def greedy_select(dataset: ChartFeatureDataset, max_k, weights, cfg: TrainConfig,
                  n_levels=None, balance=True) -> SelectionResult:
    """Pick charts one at a time, maximizing weighted test accuracy.

    Ties break in chart-code order; deterministic under cfg.seed because each
    candidate retrain uses the same seed.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or w.sum() == 0:
        raise ValueError("weights must be non-negative and not all zero")
    if max_k > len(dataset.chart_ids):
        raise ValueError("max_k exceeds the number of charts")
    if n_levels is None:
        n_levels = int(max(l.max() for l in dataset.train_labels3)) + 1

    chosen: List[str] = []
    curve: List[float] = []
    head_curve: List[List[float]] = []
    remaining = sorted(dataset.chart_ids)
    for _ in range(max_k):
        best = None
        for c in remaining:  # sorted order makes ties fall to the lower code
            acc, accs = _subset_accuracy(dataset, chosen + [c], w, cfg,
                                         n_levels, balance)
            if best is None or acc > best[0]:
                best = (acc, c, accs)
        acc, pick, accs = best
        chosen.append(pick)
        remaining.remove(pick)
        curve.append(acc)
        head_curve.append(accs)
    return SelectionResult(charts=chosen, accuracy_curve=curve,
                           per_head_curve=head_curve)
