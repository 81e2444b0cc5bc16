"""Integrated-gradients attribution from the zero baseline."""

import numpy as np

from .network import ModelParams, forward, input_gradient


def _balanced_mean(rows):
    """Column means via a balanced pairwise tree.

    For a power-of-two row count every partial sum of equal values stays
    exactly representable, so a constant integrand (a linear model) averages
    with zero rounding error; np.mean's blocked reduction does not.
    """
    n = rows.shape[0]
    carry = None
    while rows.shape[0] > 1:
        if rows.shape[0] % 2:
            carry = rows[-1] if carry is None else carry + rows[-1]
            rows = rows[:-1]
        rows = rows[0::2] + rows[1::2]
    total = rows[0] if carry is None else rows[0] + carry
    return total / n


def integrated_gradients(params: ModelParams, x, head, target_class, steps=256):
    """Riemann-midpoint integrated gradients of a head's class logit.

    attribution_i = x_i * mean_k dF/dx_i(alpha_k * x) with
    alpha_k = (k + 0.5)/steps; the baseline is the zero vector.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    alphas = (np.arange(steps) + 0.5) / steps
    points = alphas[:, None] * x[None, :]
    grads = input_gradient(params, points, head, target_class)
    if not np.all(np.isfinite(grads)):
        raise ValueError("non-finite gradient encountered during integration")
    return x * _balanced_mean(grads)


def completeness_gap(params: ModelParams, x, head, target_class, steps=256):
    """|sum(IG) - (F(x) - F(0))| for the target logit; a convergence check."""
    attr = integrated_gradients(params, x, head, target_class, steps)
    fx = forward(params, np.asarray(x).reshape(1, -1))[head][0, target_class]
    f0 = forward(params, np.zeros((1, len(attr))))[head][0, target_class]
    return float(abs(attr.sum() - (fx - f0))), float(fx - f0)
