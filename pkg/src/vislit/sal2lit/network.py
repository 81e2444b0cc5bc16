"""Multi-head feedforward literacy predictor, implemented on plain numpy.

Shared dense trunk (512 -> 256 -> 128 -> 64 -> 32, ReLU) feeding three
classification heads, one per literacy test.  Forward, backward, and the
versioned binary serialization live here; the training loop is in
training.py.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

TRUNK_WIDTHS = (512, 256, 128, 64, 32)
N_HEADS = 3
MODEL_MAGIC = b"S2L1"


@dataclass
class ModelParams:
    weights: List[np.ndarray]       # trunk weights, (in, out) each
    biases: List[np.ndarray]
    head_weights: List[np.ndarray]  # one (trunk_out, n_levels) per head
    head_biases: List[np.ndarray]
    activation: str = "relu"

    @property
    def n_inputs(self):
        return self.weights[0].shape[0]

    @property
    def n_levels(self):
        return self.head_weights[0].shape[1]

    def check_shapes(self):
        d = self.n_inputs
        for w, b in zip(self.weights, self.biases):
            if w.shape[0] != d or b.shape != (w.shape[1],):
                raise ValueError(f"layer shape chain broken at {w.shape}")
            d = w.shape[1]
        for w, b in zip(self.head_weights, self.head_biases):
            if w.shape[0] != d or b.shape != (w.shape[1],):
                raise ValueError(f"head shape mismatch: {w.shape}")
        for arr in self.all_arrays():
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite model parameters")

    def all_arrays(self):
        return (self.weights + self.biases
                + self.head_weights + self.head_biases)


def init_params(n_inputs, n_levels, seed, trunk_widths=TRUNK_WIDTHS,
                n_heads=N_HEADS) -> ModelParams:
    """He-initialized weights, zero biases; deterministic under seed."""
    rng = np.random.default_rng(seed)
    dims = [n_inputs, *trunk_widths]
    weights, biases = [], []
    for din, dout in zip(dims, dims[1:]):
        weights.append(rng.normal(0, np.sqrt(2.0 / din), size=(din, dout)))
        biases.append(np.zeros(dout))
    head_w = [rng.normal(0, np.sqrt(2.0 / dims[-1]), size=(dims[-1], n_levels))
              for _ in range(n_heads)]
    head_b = [np.zeros(n_levels) for _ in range(n_heads)]
    return ModelParams(weights, biases, head_w, head_b)


def relu(z):
    return np.maximum(z, 0.0)


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: ModelParams, x, keep_cache=False):
    """Batch forward pass; returns per-head logits (and the activation cache)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != params.n_inputs:
        raise ValueError(
            f"feature width {x.shape[1]} != model input width {params.n_inputs}")
    h = x
    cache = {"acts": [x], "pre": []}
    for w, b in zip(params.weights, params.biases):
        z = h @ w + b
        h = relu(z)
        cache["pre"].append(z)
        cache["acts"].append(h)
    logits = [h @ w + b for w, b in zip(params.head_weights, params.head_biases)]
    return (logits, cache) if keep_cache else logits


def mean_cross_entropy(logits, labels3):
    """Equal-weight mean of the three per-head cross-entropies (nats)."""
    total = 0.0
    for k, logit in enumerate(logits):
        p = softmax(logit)
        n = p.shape[0]
        total += -np.mean(np.log(p[np.arange(n), labels3[k]] + 1e-300))
    return total / len(logits)


def backward(params: ModelParams, cache, logits, labels3):
    """Gradients of the mean cross-entropy w.r.t. every parameter.

    Returns a ModelParams-shaped structure of gradients.
    """
    n = cache["acts"][0].shape[0]
    h_last = cache["acts"][-1]
    gw = [np.zeros_like(w) for w in params.weights]
    gb = [np.zeros_like(b) for b in params.biases]
    ghw, ghb = [], []
    dh_last = np.zeros_like(h_last)
    n_heads = len(logits)
    for k, logit in enumerate(logits):
        p = softmax(logit)
        dlogit = p.copy()
        dlogit[np.arange(n), labels3[k]] -= 1.0
        dlogit /= n * n_heads
        ghw.append(h_last.T @ dlogit)
        ghb.append(dlogit.sum(axis=0))
        dh_last += dlogit @ params.head_weights[k].T
    dh = dh_last
    for i in range(len(params.weights) - 1, -1, -1):
        dz = dh * (cache["pre"][i] > 0)
        gw[i] = cache["acts"][i].T @ dz
        gb[i] = dz.sum(axis=0)
        dh = dz @ params.weights[i].T
    return ModelParams(gw, gb, ghw, ghb, params.activation)


def input_gradient(params: ModelParams, x, head, target_class):
    """Gradient of one head's target-class logit with respect to the input."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    logits, cache = forward(params, x, keep_cache=True)
    dlogit = np.zeros_like(logits[head])
    dlogit[:, target_class] = 1.0
    dh = dlogit @ params.head_weights[head].T
    for i in range(len(params.weights) - 1, -1, -1):
        dz = dh * (cache["pre"][i] > 0)
        dh = dz @ params.weights[i].T
    return dh


def predict(params: ModelParams, x):
    """Per-head class probabilities and argmax levels (ties to lower index)."""
    logits = forward(params, np.atleast_2d(x))
    probs = [softmax(l) for l in logits]
    levels = [np.argmax(p, axis=1) for p in probs]  # argmax takes first on ties
    return levels, probs


# ---------------------------------------------------------------------------
# serialization: magic "S2L1", u32 trunk-layer count, u32 head count,
# u32 input dim, per-trunk-layer u32 out dim, per-head u32 out dim, then for
# every layer in order (trunk then heads) f32 LE weights row-major followed
# by f32 LE biases.

def save_model(path, params: ModelParams):
    params.check_shapes()
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<III", len(params.weights),
                            len(params.head_weights), params.n_inputs))
        for w in params.weights:
            f.write(struct.pack("<I", w.shape[1]))
        for w in params.head_weights:
            f.write(struct.pack("<I", w.shape[1]))
        for w, b in list(zip(params.weights, params.biases)) + \
                list(zip(params.head_weights, params.head_biases)):
            f.write(w.astype("<f4").tobytes(order="C"))
            f.write(b.astype("<f4").tobytes(order="C"))


def load_model(path) -> ModelParams:
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise ValueError(f"{path}: bad model magic {data[:4]!r}")
    n_trunk, n_heads, n_in = struct.unpack_from("<III", data, 4)
    off = 16
    trunk_dims = struct.unpack_from(f"<{n_trunk}I", data, off)
    off += 4 * n_trunk
    head_dims = struct.unpack_from(f"<{n_heads}I", data, off)
    off += 4 * n_heads

    def read_layer(din, dout):
        nonlocal off
        w = np.frombuffer(data, dtype="<f4", count=din * dout, offset=off)
        off += 4 * din * dout
        b = np.frombuffer(data, dtype="<f4", count=dout, offset=off)
        off += 4 * dout
        return (w.reshape(din, dout).astype(np.float64), b.astype(np.float64))

    weights, biases = [], []
    d = n_in
    for dout in trunk_dims:
        w, b = read_layer(d, dout)
        weights.append(w)
        biases.append(b)
        d = dout
    head_w, head_b = [], []
    for dout in head_dims:
        w, b = read_layer(d, dout)
        head_w.append(w)
        head_b.append(b)
    params = ModelParams(weights, biases, head_w, head_b)
    params.check_shapes()
    return params
