"""Deterministic mini-batch Adam training of the multi-head predictor."""

import copy
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .network import (ModelParams, TRUNK_WIDTHS, backward, forward, init_params,
                      mean_cross_entropy, predict)


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    learning_rate: float = 1e-4
    batch_size: int = 256
    max_epochs: int = 150
    patience: int = 10
    validation_fraction: float = 0.1
    trunk_widths: tuple = TRUNK_WIDTHS

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.max_epochs,
               self.patience, self.validation_fraction) <= 0:
            raise ValueError("all training hyperparameters must be positive")


@dataclass
class TrainHistory:
    epochs: List[Tuple[int, float, float]] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")


class NonFiniteLossError(RuntimeError):
    def __init__(self, epoch, batch):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")


class _Adam:
    def __init__(self, arrays, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, arrays, grads):
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            a -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def train(features, labels3, cfg: TrainConfig, n_levels=None):
    """Train with Adam on the equal-weight mean of three cross-entropies.

    Early stopping on validation loss (patience epochs); the returned
    parameters are the best-validation snapshot.  Fully deterministic for a
    given (features, labels3, cfg).
    """
    x = np.asarray(features, dtype=np.float64)
    labels3 = [np.asarray(l, dtype=np.int64) for l in labels3]
    if x.ndim != 2:
        raise ValueError("features must be a 2D matrix")
    if any(l.size != x.shape[0] for l in labels3):
        raise ValueError("label vectors must align with the feature rows")
    if n_levels is None:
        n_levels = int(max(l.max() for l in labels3)) + 1

    rng = np.random.default_rng(cfg.seed)
    n = x.shape[0]
    perm = rng.permutation(n)
    n_val = max(1, int(round(cfg.validation_fraction * n)))
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]
    if train_idx.size == 0:
        raise ValueError("no training rows left after validation split")

    params = init_params(x.shape[1], n_levels, seed=cfg.seed,
                         trunk_widths=cfg.trunk_widths)
    arrays = params.all_arrays()
    opt = _Adam(arrays, cfg.learning_rate)

    xv = x[val_idx]
    lv = [l[val_idx] for l in labels3]
    history = TrainHistory()
    best_params = copy.deepcopy(params)
    since_best = 0

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(train_idx)
        train_losses = []
        for bi, start in enumerate(range(0, order.size, cfg.batch_size)):
            batch = order[start:start + cfg.batch_size]
            logits, cache = forward(params, x[batch], keep_cache=True)
            lb = [l[batch] for l in labels3]
            loss = mean_cross_entropy(logits, lb)
            if not np.isfinite(loss):
                raise NonFiniteLossError(epoch, bi)
            grads = backward(params, cache, logits, lb)
            opt.step(arrays, grads.all_arrays())
            train_losses.append(loss)
        val_loss = mean_cross_entropy(forward(params, xv), lv)
        history.epochs.append((epoch, float(np.mean(train_losses)), float(val_loss)))
        if val_loss < history.best_val_loss:
            history.best_val_loss = float(val_loss)
            history.best_epoch = epoch
            best_params = copy.deepcopy(params)
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break
    return best_params, history


def evaluate(params: ModelParams, features, labels3):
    """Per-head accuracy plus their macro average."""
    levels, _ = predict(params, features)
    accs = [float(np.mean(levels[k] == np.asarray(labels3[k])))
            for k in range(len(labels3))]
    return accs, float(np.mean(accs))
