"""Dense and LSTM layers with explicit forward caches and backward passes.

Layers only hold parameters. Forward functions return their cache instead of
storing it, so a trained network can be evaluated from several threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from utils.errors import NumericError, ShapeError

ACTIVATIONS = ("tanh", "sigmoid", "relu", "softmax", "linear")


@dataclass
class Parameter:
    value: np.ndarray
    name: str = ""
    frozen: bool = False
    grad: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=np.float64)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        elif self.grad.shape != self.value.shape:
            raise ShapeError(f"gradient of {self.name}", self.value.shape, self.grad.shape)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad.fill(0.0)


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    limit = 1.0 / np.sqrt(max(1, fan_in))
    return rng.uniform(-limit, limit, size=shape)


# ---------------------- activations ----------------------

def sigmoid(x: np.ndarray) -> np.ndarray:
    return special.expit(x)


def softmax(x: np.ndarray) -> np.ndarray:
    return special.softmax(x, axis=-1)


def activate(pre: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(pre)
    if kind == "sigmoid":
        return sigmoid(pre)
    if kind == "relu":
        return np.maximum(pre, 0.0)
    if kind == "softmax":
        return softmax(pre)
    if kind == "linear":
        return pre.copy()
    raise ValueError(f"unknown activation {kind!r}")


def activation_backward(grad_out: np.ndarray, pre: np.ndarray, out: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return grad_out * (1.0 - out * out)
    if kind == "sigmoid":
        return grad_out * out * (1.0 - out)
    if kind == "relu":
        return grad_out * (pre > 0)
    if kind == "softmax":
        return out * (grad_out - np.sum(grad_out * out, axis=-1, keepdims=True))
    if kind == "linear":
        return grad_out
    raise ValueError(f"unknown activation {kind!r}")


# ---------------------- dense ----------------------

@dataclass
class DenseLayer:
    """Fully connected layer; any leading axes are treated as batch/time (time-distributed)."""

    weights: Parameter
    bias: Parameter
    activation: str = "linear"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeError("dense bias", (self.weights.shape[0],), self.bias.shape)

    @classmethod
    def create(cls, n_in: int, n_out: int, activation: str, rng: np.random.Generator, name: str = "dense"):
        return cls(
            weights=Parameter(_uniform(rng, n_in, (n_out, n_in)), name=f"{name}.W"),
            bias=Parameter(_uniform(rng, n_in, (n_out,)), name=f"{name}.b"),
            activation=activation,
        )

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.weights, self.bias]


@dataclass
class DenseCache:
    x: np.ndarray
    pre: np.ndarray
    out: np.ndarray


def dense_forward_cached(x: np.ndarray, layer: DenseLayer) -> tuple[np.ndarray, DenseCache]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] != layer.n_in:
        raise ShapeError("dense input", (*x.shape[:-1], layer.n_in), x.shape)
    pre = x @ layer.weights.value.T + layer.bias.value
    out = activate(pre, layer.activation)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite dense output")
    return out, DenseCache(x=x, pre=pre, out=out)


def dense_forward(x: np.ndarray, layer: DenseLayer) -> np.ndarray:
    return dense_forward_cached(x, layer)[0]


def dense_backward(
    grad: np.ndarray,
    layer: DenseLayer,
    cache: DenseCache,
    *,
    grad_is_pre_activation: bool = False,
    need_input_grad: bool = True,
) -> np.ndarray | None:
    """Accumulate parameter gradients and return dL/dx.

    ``grad_is_pre_activation`` is used when the loss already folded the
    activation in (softmax + cross-entropy).
    """
    g_pre = grad if grad_is_pre_activation else activation_backward(grad, cache.pre, cache.out, layer.activation)
    flat_g = g_pre.reshape(-1, layer.n_out)
    if not layer.weights.frozen:
        layer.weights.grad += flat_g.T @ cache.x.reshape(-1, layer.n_in)
    if not layer.bias.frozen:
        layer.bias.grad += flat_g.sum(axis=0)
    if not need_input_grad:
        return None
    return g_pre @ layer.weights.value


# ---------------------- LSTM ----------------------

# gate order along the first axis of W, U, b
GATES = ("input", "forget", "candidate", "output")


@dataclass
class LSTMLayer:
    """W: (4, cells, n_in), U: (4, cells, cells), b: (4, cells)."""

    W: Parameter
    U: Parameter
    b: Parameter

    def __post_init__(self):
        cells = self.cells
        if self.W.shape[:2] != (4, cells) or self.W.value.ndim != 3:
            raise ShapeError("LSTM input weights", (4, cells, "n_in"), self.W.shape)
        if self.U.shape != (4, cells, cells):
            raise ShapeError("LSTM recurrent weights", (4, cells, cells), self.U.shape)
        if self.b.shape != (4, cells):
            raise ShapeError("LSTM biases", (4, cells), self.b.shape)

    @classmethod
    def create(cls, n_in: int, cells: int, rng: np.random.Generator, name: str = "lstm"):
        if cells < 1:
            raise ValueError("cells must be positive")
        fan_in = n_in + cells
        return cls(
            W=Parameter(_uniform(rng, fan_in, (4, cells, n_in)), name=f"{name}.W"),
            U=Parameter(_uniform(rng, fan_in, (4, cells, cells)), name=f"{name}.U"),
            b=Parameter(_uniform(rng, fan_in, (4, cells)), name=f"{name}.b"),
        )

    @property
    def cells(self) -> int:
        return self.b.value.shape[-1]

    @property
    def n_in(self) -> int:
        return self.W.shape[2]

    def parameters(self) -> list[Parameter]:
        return [self.W, self.U, self.b]


@dataclass
class LSTMCache:
    x: np.ndarray        # (N, T, D)
    h: np.ndarray        # (N, T+1, H), h[:, 0] is h0
    c: np.ndarray        # (N, T+1, H)
    gates: np.ndarray    # (N, T, 4, H) post-nonlinearity
    tanh_c: np.ndarray   # (N, T, H)


def lstm_forward_cached(
    seq: np.ndarray,
    layer: LSTMLayer,
    h0: np.ndarray | None = None,
    c0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, LSTMCache]:
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != layer.n_in:
        raise ShapeError("LSTM input", ("N", "T", layer.n_in), x.shape)
    n, steps, _ = x.shape
    cells = layer.cells
    h = np.zeros((n, steps + 1, cells))
    c = np.zeros((n, steps + 1, cells))
    if h0 is not None:
        h[:, 0] = np.broadcast_to(h0, (n, cells))
    if c0 is not None:
        c[:, 0] = np.broadcast_to(c0, (n, cells))
    gates = np.empty((n, steps, 4, cells))
    tanh_c = np.empty((n, steps, cells))

    w_flat = layer.W.value.reshape(4 * cells, layer.n_in)
    u_flat = layer.U.value.reshape(4 * cells, cells)
    b_flat = layer.b.value.reshape(4 * cells)
    x_proj = x @ w_flat.T + b_flat

    for t in range(steps):
        z = (x_proj[:, t] + h[:, t] @ u_flat.T).reshape(n, 4, cells)
        i = sigmoid(z[:, 0])
        f = sigmoid(z[:, 1])
        g = np.tanh(z[:, 2])
        o = sigmoid(z[:, 3])
        c[:, t + 1] = f * c[:, t] + i * g
        tanh_c[:, t] = np.tanh(c[:, t + 1])
        h[:, t + 1] = o * tanh_c[:, t]
        if not (np.all(np.isfinite(c[:, t + 1])) and np.all(np.isfinite(h[:, t + 1]))):
            raise NumericError("non-finite LSTM state", timestep=t + 1)
        gates[:, t, 0], gates[:, t, 1], gates[:, t, 2], gates[:, t, 3] = i, f, g, o

    cache = LSTMCache(x=x, h=h, c=c, gates=gates, tanh_c=tanh_c)
    return h[:, 1:], c[:, 1:], cache


def lstm_forward(
    seq: np.ndarray,
    layer: LSTMLayer,
    h0: np.ndarray | None = None,
    c0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Full per-timestep hidden and cell sequences.

    Accepts a single sequence (T, D) or a batch (N, T, D); the output keeps the
    input's rank.
    """
    seq = np.asarray(seq, dtype=np.float64)
    single = seq.ndim == 2
    if single:
        seq = seq[None]
    if h0 is not None and np.shape(h0)[-1] != layer.cells:
        raise ShapeError("LSTM h0", (layer.cells,), np.shape(h0))
    if c0 is not None and np.shape(c0)[-1] != layer.cells:
        raise ShapeError("LSTM c0", (layer.cells,), np.shape(c0))
    hidden, cell, _ = lstm_forward_cached(seq, layer, h0, c0)
    if single:
        return hidden[0], cell[0]
    return hidden, cell


def lstm_backward(
    grad_hidden: np.ndarray,
    layer: LSTMLayer,
    cache: LSTMCache,
    *,
    need_input_grad: bool = True,
) -> np.ndarray | None:
    """Backpropagation through time from dL/dh_t for every t; returns dL/dx."""
    n, steps, cells = grad_hidden.shape
    u_flat = layer.U.value.reshape(4 * cells, cells)
    w_flat = layer.W.value.reshape(4 * cells, layer.n_in)
    track_params = not (layer.W.frozen and layer.U.frozen and layer.b.frozen)

    dz_all = np.empty((n, steps, 4, cells))
    dh_next = np.zeros((n, cells))
    dc_next = np.zeros((n, cells))
    for t in reversed(range(steps)):
        i, f, g, o = (cache.gates[:, t, k] for k in range(4))
        tc = cache.tanh_c[:, t]
        dh = grad_hidden[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * cache.c[:, t]
        dc_next = dc * f
        dz = dz_all[:, t]
        dz[:, 0] = di * i * (1.0 - i)
        dz[:, 1] = df * f * (1.0 - f)
        dz[:, 2] = dg * (1.0 - g * g)
        dz[:, 3] = do * o * (1.0 - o)
        dh_next = dz.reshape(n, 4 * cells) @ u_flat

    flat_dz = dz_all.reshape(n * steps, 4 * cells)
    if track_params:
        if not layer.W.frozen:
            layer.W.grad += (flat_dz.T @ cache.x.reshape(n * steps, -1)).reshape(layer.W.shape)
        if not layer.U.frozen:
            layer.U.grad += (flat_dz.T @ cache.h[:, :-1].reshape(n * steps, cells)).reshape(layer.U.shape)
        if not layer.b.frozen:
            layer.b.grad += flat_dz.sum(axis=0).reshape(layer.b.shape)
    if not need_input_grad:
        return None
    return (flat_dz @ w_flat).reshape(n, steps, layer.n_in)
