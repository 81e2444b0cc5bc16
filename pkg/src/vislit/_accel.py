"""Hot numeric kernels with optional numba acceleration.

Every kernel has a pure-numpy implementation; the numba-compiled variant is
used when numba is importable and the environment variable
``VISLIT_DISABLE_NUMBA`` is unset (or "0").  Both paths produce identical
results (float64 arithmetic, same operation order per pixel), so tests and
benchmarks can compare them directly.
"""

import os

import numpy as np

_DISABLE = os.environ.get("VISLIT_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# pure numpy reference implementations

def _stamp_disks_np(grid, xs, ys, radius, additive):
    h, w = grid.shape
    span = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(span, span)
    inside = dx * dx + dy * dy <= radius * radius
    offy = dy[inside]
    offx = dx[inside]
    for cx, cy in zip(xs, ys):
        py = offy + cy
        px = offx + cx
        ok = (py >= 0) & (py < h) & (px >= 0) & (px < w)
        if additive:
            np.add.at(grid, (py[ok], px[ok]), 1.0)
        else:
            grid[py[ok], px[ok]] = 1.0
    return grid


def _sep_convolve_np(grid, kernel):
    # accumulate tap by tap in ascending kernel order; the numba variant
    # sums in the same order, so the two paths agree to the last bit
    h, w = grid.shape
    n = len(kernel)
    r = n // 2
    padded = np.zeros((h, w + 2 * r))
    padded[:, r:r + w] = grid
    tmp = np.zeros((h, w))
    for i in range(n):
        tmp += padded[:, i:i + w] * kernel[i]
    padded = np.zeros((h + 2 * r, w))
    padded[r:r + h, :] = tmp
    out = np.zeros((h, w))
    for i in range(n):
        out += padded[i:i + h, :] * kernel[i]
    return out


# ---------------------------------------------------------------------------
# numba variants

if HAVE_NUMBA:

    @njit(cache=True)
    def _stamp_disks_nb(grid, xs, ys, radius, additive):  # pragma: no cover - jit
        h, w = grid.shape
        r2 = radius * radius
        for k in range(xs.shape[0]):
            cx = xs[k]
            cy = ys[k]
            y0 = cy - radius if cy - radius > 0 else 0
            y1 = cy + radius if cy + radius < h - 1 else h - 1
            x0 = cx - radius if cx - radius > 0 else 0
            x1 = cx + radius if cx + radius < w - 1 else w - 1
            for y in range(y0, y1 + 1):
                dy = y - cy
                for x in range(x0, x1 + 1):
                    dx = x - cx
                    if dx * dx + dy * dy <= r2:
                        if additive:
                            grid[y, x] += 1.0
                        else:
                            grid[y, x] = 1.0
        return grid

    @njit(cache=True)
    def _sep_convolve_nb(grid, kernel):  # pragma: no cover - jit
        h, w = grid.shape
        n = kernel.shape[0]
        r = n // 2
        tmp = np.zeros((h, w))
        for y in range(h):
            for x in range(w):
                i0 = r - x if x < r else 0
                i1 = w - x + r if x + r >= w else n
                acc = 0.0
                for i in range(i0, i1):
                    acc += grid[y, x + i - r] * kernel[i]
                tmp[y, x] = acc
        out = np.zeros((h, w))
        for y in range(h):
            i0 = r - y if y < r else 0
            i1 = h - y + r if y + r >= h else n
            for x in range(w):
                acc = 0.0
                for i in range(i0, i1):
                    acc += tmp[y + i - r, x] * kernel[i]
                out[y, x] = acc
        return out


def stamp_disks(grid, xs, ys, radius, additive=True):
    """Stamp unit disks of `radius` centered at (xs[i], ys[i]) onto `grid`.

    ADDITIVE mode sums overlapping disks; otherwise the union is marked 1.
    Modifies and returns `grid` (float64, shape (h, w)).
    """
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    if HAVE_NUMBA:
        return _stamp_disks_nb(grid, xs, ys, int(radius), additive)
    return _stamp_disks_np(grid, xs, ys, int(radius), additive)


def sep_convolve(grid, kernel):
    """Separable 2D convolution (same 1D kernel on both axes), zero padding."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if HAVE_NUMBA:
        return _sep_convolve_nb(grid, kernel)
    return _sep_convolve_np(grid, kernel)
