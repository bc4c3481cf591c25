"""Encoder-decoder sequence classifier: stacked LSTM encoder, time-distributed dense head.

The decoder receives a single code (the encoder's final hidden state, or the
output of the bottleneck entry layer), repeats it over the T output steps and
appends a one-hot timestep code so each step gets its own class distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nncore.layers import (
    DenseCache,
    DenseLayer,
    LSTMCache,
    LSTMLayer,
    Parameter,
    dense_backward,
    dense_forward_cached,
    lstm_backward,
    lstm_forward_cached,
)
from utils.errors import ContractError, ShapeError


@dataclass
class EncoderDecoder:
    encoder: list[LSTMLayer]
    head: list[DenseLayer]
    timesteps: int
    n_features: int
    entry: DenseLayer | None = None

    def __post_init__(self):
        if not self.encoder or not self.head:
            raise ShapeError("network", ("encoder>=1", "head>=1"), (len(self.encoder), len(self.head)))
        if self.head[-1].activation != "softmax":
            raise ContractError("the last head layer must use softmax")

    @classmethod
    def create(
        cls,
        n_features: int,
        timesteps: int,
        encoder_sizes,
        decoder_sizes,
        n_classes: int,
        rng: np.random.Generator,
        activation: str = "tanh",
    ) -> "EncoderDecoder":
        encoder = []
        n_in = n_features
        for k, cells in enumerate(encoder_sizes, start=1):
            encoder.append(LSTMLayer.create(n_in, cells, rng, name=f"encoder.{k}"))
            n_in = cells
        head = []
        n_in = encoder_sizes[-1] + timesteps
        for k, units in enumerate(decoder_sizes, start=1):
            head.append(DenseLayer.create(n_in, units, activation, rng, name=f"decoder.{k}"))
            n_in = units
        head.append(DenseLayer.create(n_in, n_classes, "softmax", rng, name="decoder.out"))
        return cls(encoder=encoder, head=head, timesteps=timesteps, n_features=n_features)

    @property
    def n_classes(self) -> int:
        return self.head[-1].n_out

    @property
    def code_size(self) -> int:
        """Size of the code the shared head consumes."""
        return self.head[0].n_in - self.timesteps

    def parameters(self) -> list[Parameter]:
        params = []
        for layer in self.encoder:
            params.extend(layer.parameters())
        if self.entry is not None:
            params.extend(self.entry.parameters())
        for layer in self.head:
            params.extend(layer.parameters())
        return params

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()


@dataclass
class ForwardCache:
    depth: int
    use_entry: bool
    encoder: list[LSTMCache] = field(default_factory=list)
    entry: DenseCache | None = None
    head: list[DenseCache] = field(default_factory=list)
    hidden: list[np.ndarray] = field(default_factory=list)
    probs: np.ndarray | None = None


def _check_route(net: EncoderDecoder, depth: int, use_entry: bool):
    if not 1 <= depth <= len(net.encoder):
        raise ContractError(f"encoder depth must be in 1..{len(net.encoder)}, got {depth}")
    if use_entry and net.entry is None:
        raise ContractError("bottleneck entry layer requested but the network has none")


def _check_input(net: EncoderDecoder, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[1:] != (net.timesteps, net.n_features):
        raise ShapeError("network input", ("N", net.timesteps, net.n_features), x.shape)
    return x


def _decoder_input(net: EncoderDecoder, code: np.ndarray) -> np.ndarray:
    n = code.shape[0]
    repeated = np.broadcast_to(code[:, None, :], (n, net.timesteps, code.shape[1]))
    steps = np.broadcast_to(np.eye(net.timesteps), (n, net.timesteps, net.timesteps))
    return np.concatenate([repeated, steps], axis=2)


def forward(net: EncoderDecoder, x: np.ndarray, depth: int | None = None, use_entry: bool = False):
    """Run the encoder up to ``depth`` layers and decode its final state.

    Returns (probs (N, T, K), cache).
    """
    depth = len(net.encoder) if depth is None else depth
    _check_route(net, depth, use_entry)
    seq = _check_input(net, x)
    cache = ForwardCache(depth=depth, use_entry=use_entry)
    for layer in net.encoder[:depth]:
        seq, _, lc = lstm_forward_cached(seq, layer)
        cache.encoder.append(lc)
        cache.hidden.append(seq)
    code = seq[:, -1]
    if use_entry:
        code, cache.entry = dense_forward_cached(code, net.entry)
    if code.shape[1] != net.code_size:
        raise ShapeError("decoder code", (net.code_size,), (code.shape[1],))
    out = _decoder_input(net, code)
    for layer in net.head:
        out, dc = dense_forward_cached(out, layer)
        cache.head.append(dc)
    cache.probs = out
    return out, cache


def encode(net: EncoderDecoder, x: np.ndarray, depth: int) -> np.ndarray:
    """Final hidden state of encoder layer ``depth`` (the transmissible code)."""
    _check_route(net, depth, False)
    seq = _check_input(net, x)
    for layer in net.encoder[:depth]:
        seq, _, _ = lstm_forward_cached(seq, layer)
    return seq[:, -1]


def decode(net: EncoderDecoder, code: np.ndarray, use_entry: bool) -> np.ndarray:
    """Edge-side half of the network: code (N, d) -> probs (N, T, K)."""
    code = np.asarray(code, dtype=np.float64)
    if use_entry:
        if net.entry is None:
            raise ContractError("bottleneck entry layer requested but the network has none")
        code, _ = dense_forward_cached(code, net.entry)
    if code.ndim != 2 or code.shape[1] != net.code_size:
        raise ShapeError("decoder code", ("N", net.code_size), code.shape)
    out = _decoder_input(net, code)
    for layer in net.head:
        out, _ = dense_forward_cached(out, layer)
    return out


def cross_entropy(probs: np.ndarray, targets: np.ndarray) -> float:
    """Per-timestep categorical cross-entropy averaged over timesteps and batch."""
    targets = np.asarray(targets, dtype=np.int64)
    picked = np.take_along_axis(probs, targets[..., None], axis=-1)[..., 0]
    return float(-np.mean(np.log(np.clip(picked, 1e-300, None))))


def cross_entropy_grad(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """dL/dlogits for softmax + cross-entropy."""
    targets = np.asarray(targets, dtype=np.int64)
    grad = probs.copy()
    np.put_along_axis(grad, targets[..., None], np.take_along_axis(grad, targets[..., None], axis=-1) - 1.0, axis=-1)
    return grad / (targets.shape[0] * targets.shape[1])


def _has_trainable(layers) -> bool:
    return any(not p.frozen for layer in layers for p in layer.parameters())


def backward(net: EncoderDecoder, cache: ForwardCache, targets: np.ndarray) -> float:
    """Accumulate gradients of the mean cross-entropy into every non-frozen parameter.

    Backpropagation stops once no trainable parameter remains below the
    current layer; frozen parameters never receive a gradient.
    """
    targets = np.asarray(targets)
    if targets.shape != cache.probs.shape[:2]:
        raise ShapeError("targets", cache.probs.shape[:2], targets.shape)
    loss = cross_entropy(cache.probs, targets)

    encoder_used = net.encoder[: cache.depth]
    below_head = list(encoder_used) + ([net.entry] if cache.use_entry else [])

    grad = cross_entropy_grad(cache.probs, targets)
    last = len(net.head) - 1
    for k in range(last, -1, -1):
        layer = net.head[k]
        need = k > 0 or _has_trainable(below_head)
        grad = dense_backward(grad, layer, cache.head[k], grad_is_pre_activation=(k == last), need_input_grad=need)
        if grad is None:
            return loss

    code_grad = grad[:, :, : net.code_size].sum(axis=1)
    if cache.use_entry:
        need = _has_trainable(encoder_used)
        code_grad = dense_backward(code_grad, net.entry, cache.entry, need_input_grad=need)
        if code_grad is None:
            return loss

    n, steps, _ = cache.hidden[-1].shape
    grad_hidden = np.zeros((n, steps, encoder_used[-1].cells))
    grad_hidden[:, -1] = code_grad
    for k in range(cache.depth - 1, -1, -1):
        need = _has_trainable(encoder_used[:k])
        grad_hidden = lstm_backward(grad_hidden, encoder_used[k], cache.encoder[k], need_input_grad=need)
        if grad_hidden is None:
            break
    return loss
