"""Click logs -> continuous attention maps.

A BubbleView session reveals circular bubbles at click locations; the
analysis-side map stamps those disks on a zero grid and blurs them with a
truncated separable Gaussian.  All operations are pure functions.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from . import _accel

SKIPPED = "SKIPPED"


class NormMode(str, Enum):
    RAW = "RAW"
    SUM1 = "SUM1"
    MAX1 = "MAX1"


class Accumulation(str, Enum):
    ADDITIVE = "ADDITIVE"
    UNION = "UNION"


class ZeroMassError(ValueError):
    """Normalization requested on an all-zero map."""


class OutOfBoundsClickError(ValueError):
    def __init__(self, index, click):
        self.index = index
        self.click = click
        super().__init__(f"click #{index} out of bounds: {click}")


@dataclass(frozen=True)
class ClickEvent:
    x: int
    y: int
    t: int  # ms since chart onset


@dataclass(frozen=True)
class SessionLog:
    participant_id: str
    chart_id: str
    clicks: tuple
    answer: object  # choice index or SKIPPED
    duration_s: float
    image_w: int
    image_h: int

    def __post_init__(self):
        object.__setattr__(self, "clicks", tuple(self.clicks))
        ts = [c.t for c in self.clicks]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("click timestamps must be nondecreasing")
        if ts and self.duration_s < ts[-1] / 1000.0:
            raise ValueError("duration_s shorter than last click timestamp")


@dataclass(frozen=True)
class RasterConfig:
    bubble_radius: int = 32
    blur_sigma: float = 19.0
    accumulation: Accumulation = Accumulation.ADDITIVE

    def __post_init__(self):
        if self.bubble_radius <= 0:
            raise ValueError("bubble_radius must be > 0")
        if self.blur_sigma <= 0:
            raise ValueError("blur_sigma must be > 0")


@dataclass(frozen=True)
class AttentionMap:
    values: np.ndarray  # (h, w) float64, non-negative
    norm_mode: NormMode = NormMode.RAW

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise ValueError("attention map must be 2D")
        if np.any(v < 0):
            raise ValueError("attention map values must be non-negative")

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]


def gaussian_kernel(sigma):
    """1D Gaussian truncated at radius ceil(3*sigma), normalized to sum 1."""
    r = math.ceil(3.0 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def rasterize(log: SessionLog, cfg: RasterConfig = RasterConfig()) -> AttentionMap:
    """Stamp a disk at every click, then blur with the truncated Gaussian.

    Returns a RAW map; an empty click list yields the all-zero map.
    Raises OutOfBoundsClickError naming the first offending click.
    """
    for i, c in enumerate(log.clicks):
        if not (0 <= c.x < log.image_w and 0 <= c.y < log.image_h):
            raise OutOfBoundsClickError(i, c)
    grid = np.zeros((log.image_h, log.image_w))
    if log.clicks:
        xs = np.array([c.x for c in log.clicks])
        ys = np.array([c.y for c in log.clicks])
        _accel.stamp_disks(grid, xs, ys, cfg.bubble_radius,
                           additive=cfg.accumulation == Accumulation.ADDITIVE)
        grid = _accel.sep_convolve(grid, gaussian_kernel(cfg.blur_sigma))
        np.maximum(grid, 0.0, out=grid)  # clamp fp dust from the convolution
    return AttentionMap(grid, NormMode.RAW)


def normalize(amap: AttentionMap, mode: NormMode) -> AttentionMap:
    """Rescale to unit sum (SUM1) or unit max (MAX1)."""
    if mode not in (NormMode.SUM1, NormMode.MAX1):
        raise ValueError(f"unsupported normalization mode: {mode}")
    v = amap.values
    denom = v.sum() if mode == NormMode.SUM1 else v.max()
    if denom <= 0:
        raise ZeroMassError("cannot normalize an all-zero map")
    return AttentionMap(v / denom, mode)


def aggregate(maps: Sequence[AttentionMap]) -> AttentionMap:
    """Element-wise mean of SUM1-normalized maps, re-normalized to SUM1."""
    if not maps:
        raise ValueError("cannot aggregate an empty list of maps")
    shape = maps[0].values.shape
    total = np.zeros(shape)
    for m in maps:
        if m.values.shape != shape:
            raise ValueError(f"dimension mismatch: {m.values.shape} vs {shape}")
        total += normalize(m, NormMode.SUM1).values
    total /= len(maps)
    return normalize(AttentionMap(total), NormMode.SUM1)


def binarize_top_fraction(amap: AttentionMap, fraction: float) -> np.ndarray:
    """Mask of the ceil(f*N) highest-valued pixels; ties broken row-major."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    flat = amap.values.ravel()
    k = math.ceil(fraction * flat.size)
    # stable sort on (-value, index): equal values keep row-major order
    order = np.argsort(-flat, kind="stable")
    mask = np.zeros(flat.size, dtype=bool)
    mask[order[:k]] = True
    return mask.reshape(amap.values.shape)


def binarize_threshold(amap: AttentionMap, eps: float) -> np.ndarray:
    """Mask of pixels strictly above `eps`."""
    return amap.values > eps
