"""Scalar comparisons and descriptors of attention maps.

All pairwise metrics require dimension-matched inputs and raise
DimensionMismatchError instead of resampling.  Distribution-based metrics
(KL, SIM, entropy) expect SUM1-normalized maps.
"""

import math

import numpy as np
from scipy.stats import rankdata

from .attention import AttentionMap, binarize_top_fraction


class DimensionMismatchError(ValueError):
    pass


class UndefinedMetricError(ValueError):
    """The metric is mathematically undefined on this input (e.g. zero variance)."""


def _check_dims(a: AttentionMap, b: AttentionMap):
    if a.values.shape != b.values.shape:
        raise DimensionMismatchError(
            f"map dimensions differ: {a.values.shape} vs {b.values.shape}")


def kl_divergence(candidate: AttentionMap, reference: AttentionMap, eps=1e-12):
    """KL(reference || candidate) in nats; eps smooths only the candidate."""
    _check_dims(candidate, reference)
    r = reference.values.ravel()
    c = candidate.values.ravel()
    pos = r > 0
    return float(np.sum(r[pos] * np.log(r[pos] / (c[pos] + eps))))


def pearson_cc(a: AttentionMap, b: AttentionMap):
    _check_dims(a, b)
    x = a.values.ravel()
    y = b.values.ravel()
    # min==max catches constant maps whose std is rounding dust, not zero
    if x.min() == x.max() or y.min() == y.max():
        raise UndefinedMetricError("correlation undefined for a constant map")
    sx = x.std()
    sy = y.std()
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def sim_histogram(a: AttentionMap, b: AttentionMap):
    """Histogram intersection of two SUM1 maps: sum of element-wise minima."""
    _check_dims(a, b)
    return float(np.minimum(a.values, b.values).sum())


def nss(saliency: AttentionMap, fixations):
    """Mean z-scored saliency value at the fixation pixels (population stats)."""
    if len(fixations) == 0:
        raise ValueError("NSS requires at least one fixation")
    v = saliency.values
    if v.min() == v.max():
        raise UndefinedMetricError("NSS undefined for a constant map")
    sd = v.std()
    z = (v - v.mean()) / sd
    return float(np.mean([z[y, x] for x, y in fixations]))


def auc_judd(saliency: AttentionMap, fixations):
    """ROC AUC with fixated pixels as positives, everything else negatives.

    All non-fixated pixels are used (no negative sampling); tied saliency
    values contribute 0.5 per pair, which the rank formulation gives exactly.
    """
    if len(fixations) == 0:
        raise ValueError("AUC requires at least one fixation")
    v = saliency.values
    pos_mask = np.zeros(v.shape, dtype=bool)
    for x, y in fixations:
        pos_mask[y, x] = True
    n_pos = int(pos_mask.sum())
    n_neg = v.size - n_pos
    if n_neg == 0:
        raise ValueError("AUC requires at least one non-fixated pixel")
    ranks = rankdata(v.ravel())  # average ranks handle ties as 0.5
    pos_rank_sum = ranks[pos_mask.ravel()].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _gaussian_window(size=11, sigma=1.5):
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    k /= k.sum()
    return np.outer(k, k)


def _valid_windows(v, size):
    return np.lib.stride_tricks.sliding_window_view(v, (size, size))


def ssim(a: AttentionMap, b: AttentionMap, window_size=11, sigma=1.5,
         k1=0.01, k2=0.03):
    """Mean local SSIM over all fully-interior 11x11 Gaussian windows.

    Dynamic range L is the max over both maps (1 if both are all-zero).
    """
    _check_dims(a, b)
    x = a.values
    y = b.values
    if min(x.shape) < window_size:
        raise ValueError(f"maps must be at least {window_size}px per side for SSIM")
    L = max(x.max(), y.max())
    if L == 0:
        L = 1.0
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2
    win = _gaussian_window(window_size, sigma)
    wx = _valid_windows(x, window_size)
    wy = _valid_windows(y, window_size)
    mu_x = np.einsum("ijkl,kl->ij", wx, win)
    mu_y = np.einsum("ijkl,kl->ij", wy, win)
    xx = np.einsum("ijkl,kl->ij", wx * wx, win) - mu_x ** 2
    yy = np.einsum("ijkl,kl->ij", wy * wy, win) - mu_y ** 2
    xy = np.einsum("ijkl,kl->ij", wx * wy, win) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * xy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def mutual_information(a: AttentionMap, b: AttentionMap, bins=32):
    """Histogram MI in bits over bins x bins equal-width bins per map's range.

    A constant map carries no information; MI is 0 by convention.
    """
    _check_dims(a, b)
    x = a.values.ravel()
    y = b.values.ravel()
    if x.min() == x.max() or y.min() == y.max():
        return 0.0
    joint, _, _ = np.histogram2d(x, y, bins=bins,
                                 range=[[x.min(), x.max()], [y.min(), y.max()]])
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    outer = np.outer(px, py)
    nz = p > 0
    # fsum is order-independent, making MI(a, b) == MI(b, a) bit-exact
    return math.fsum(p[nz] * np.log2(p[nz] / outer[nz]))


def spearman_rank(a: AttentionMap, b: AttentionMap):
    """Pearson correlation of fractional ranks (average ranks on ties)."""
    _check_dims(a, b)
    if a.values.min() == a.values.max() or b.values.min() == b.values.max():
        raise UndefinedMetricError("rank correlation undefined for a constant map")
    ra = rankdata(a.values.ravel())
    rb = rankdata(b.values.ravel())
    sa = ra.std()
    sb = rb.std()
    return float(((ra - ra.mean()) * (rb - rb.mean())).mean() / (sa * sb))


def mse(a: AttentionMap, b: AttentionMap):
    _check_dims(a, b)
    d = a.values - b.values
    return float(np.mean(d * d))


def shannon_entropy(amap: AttentionMap):
    """Entropy in bits of a SUM1 map; zero cells contribute nothing."""
    p = amap.values.ravel()
    p = p[p > 0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def saliency_coverage(amap: AttentionMap, eps=None):
    """Fraction of pixels above eps (default 1e-6 of the map maximum)."""
    v = amap.values
    peak = v.max()
    if peak == 0:
        return 0.0
    if eps is None:
        eps = 1e-6 * peak
    return float(np.mean(v > eps))


def iou(mask_a, mask_b):
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    if mask_a.shape != mask_b.shape:
        raise DimensionMismatchError(
            f"mask dimensions differ: {mask_a.shape} vs {mask_b.shape}")
    union = np.logical_or(mask_a, mask_b).sum()
    if union == 0:
        raise UndefinedMetricError("IoU undefined for an empty union")
    return float(np.logical_and(mask_a, mask_b).sum() / union)


def iou_region(amap: AttentionMap, region_mask, top_fraction=0.10):
    """IoU of the binarized map against a labeled chart-region mask."""
    return iou(binarize_top_fraction(amap, top_fraction), region_mask)
