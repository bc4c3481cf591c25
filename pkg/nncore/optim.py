"""SGD and Adam with per-parameter freezing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nncore.layers import Parameter
from utils.errors import ConfigError

OPTIMIZERS = ("sgd", "adam")


@dataclass
class OptimizerConfig:
    kind: str = "adam"
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIMIZERS:
            raise ConfigError(f"optimizer kind must be one of {OPTIMIZERS}, got {self.kind!r}")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")


class SGD:
    def __init__(self, config: OptimizerConfig):
        self.config = config

    def step(self, params: list[Parameter]):
        lr = self.config.lr
        for p in params:
            if p.frozen:
                continue
            p.value -= lr * p.grad


class Adam:
    def __init__(self, config: OptimizerConfig):
        self.config = config
        self.t = 0
        self._m: dict[int, np.ndarray] = {}
        self._v: dict[int, np.ndarray] = {}

    def step(self, params: list[Parameter]):
        cfg = self.config
        self.t += 1
        c1 = 1.0 - cfg.beta1 ** self.t
        c2 = 1.0 - cfg.beta2 ** self.t
        for p in params:
            if p.frozen:
                continue
            key = id(p)
            m = self._m.setdefault(key, np.zeros_like(p.value))
            v = self._v.setdefault(key, np.zeros_like(p.value))
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * p.grad
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * p.grad * p.grad
            p.value -= cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)


def make_optimizer(config: OptimizerConfig):
    return Adam(config) if config.kind == "adam" else SGD(config)


def optimizer_step(params: list[Parameter], config: OptimizerConfig, optimizer=None):
    """One update of every non-frozen parameter; returns the optimizer so Adam state carries over."""
    optimizer = optimizer or make_optimizer(config)
    optimizer.step(params)
    return optimizer
