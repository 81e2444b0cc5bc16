"""Quantile binning of literacy scores and class-balancing oversampling."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LevelScheme:
    n_levels: int
    bin_edges: np.ndarray  # interior quantile boundaries, ascending

    def assign(self, scores):
        """Level per score; a score exactly on a boundary goes to the lower bin."""
        s = np.asarray(scores, dtype=np.float64)
        return (s[:, None] > self.bin_edges[None, :]).sum(axis=1)


def quantile_bin(scores, n_levels):
    """Equal-probability bins from empirical quantiles of the training scores.

    Returns (LevelScheme, labels).  Raises if the score distribution is too
    degenerate to populate every bin.
    """
    if not 2 <= n_levels <= 5:
        raise ValueError("n_levels must be in [2, 5]")
    s = np.asarray(scores, dtype=np.float64)
    qs = np.arange(1, n_levels) / n_levels
    edges = np.quantile(s, qs)
    scheme = LevelScheme(n_levels, edges)
    labels = scheme.assign(s)
    counts = np.bincount(labels, minlength=n_levels)
    if np.any(counts == 0):
        raise ValueError(
            f"degenerate score distribution: empty bins at levels "
            f"{np.flatnonzero(counts == 0).tolist()}")
    return scheme, labels


def oversample(rows, labels, seed):
    """Resample minority classes with replacement up to the majority count.

    Returns the selected row indices (original rows first, then the extra
    resamples), deterministic under seed.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    counts = {c: int(n) for c, n in zip(*np.unique(labels, return_counts=True))}
    target = max(counts.values())
    indices = list(range(len(labels)))
    for c in sorted(counts):
        members = np.flatnonzero(labels == c)
        deficit = target - members.size
        if deficit > 0:
            indices.extend(rng.choice(members, size=deficit, replace=True))
    return np.asarray(indices)


def oversample_round_robin(labels3, seed):
    """Balance the three heads' labels with one round-robin pass.

    Each head in turn gets its minority classes topped up to that head's
    majority count; later heads see rows added by earlier ones.  Returns the
    selected row indices into the original rows.
    """
    labels3 = [np.asarray(l) for l in labels3]
    n = labels3[0].size
    selected = np.arange(n)
    for k, labels in enumerate(labels3):
        extra = oversample(selected, labels[selected], seed + k)
        selected = selected[extra]
    return selected
