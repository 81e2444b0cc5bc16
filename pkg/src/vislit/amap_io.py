"""Attention map file formats.

AMAP binary layout: magic b"AMAP", u32 LE version (=1), u32 LE width,
u32 LE height, then width*height float32 LE values in row-major order.
PGM export is 16-bit (maxval 65535), values scaled by the map maximum,
intended for eyeballing maps in any image viewer.
"""

import struct
from pathlib import Path

import numpy as np

from .attention import AttentionMap, NormMode

AMAP_MAGIC = b"AMAP"
AMAP_VERSION = 1


class FormatError(ValueError):
    pass


def write_amap(path, amap: AttentionMap):
    v = amap.values.astype("<f4")
    h, w = v.shape
    with open(path, "wb") as f:
        f.write(AMAP_MAGIC)
        f.write(struct.pack("<III", AMAP_VERSION, w, h))
        f.write(v.tobytes(order="C"))


def read_amap(path) -> AttentionMap:
    data = Path(path).read_bytes()
    if data[:4] != AMAP_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    version, w, h = struct.unpack_from("<III", data, 4)
    if version != AMAP_VERSION:
        raise FormatError(f"{path}: unsupported AMAP version {version}")
    expected = 16 + 4 * w * h
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=16).reshape(h, w)
    return AttentionMap(values.astype(np.float64), NormMode.RAW)


def write_pgm16(path, amap: AttentionMap):
    v = amap.values
    peak = v.max()
    scaled = np.zeros(v.shape, dtype=">u2")
    if peak > 0:
        scaled = np.round(v / peak * 65535.0).astype(">u2")
    h, w = v.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(scaled.tobytes(order="C"))
