"""Two-state Markov-modulated link."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from utils.errors import ConfigError


class LinkState(str, Enum):
    NORMAL = "normal"
    CONGESTED = "congested"


@dataclass
class LinkModel:
    bandwidth_normal: float = 256.0       # bytes per ms
    bandwidth_congested: float = 32.0
    p_nc: float = 0.1                     # P(normal -> congested) per step
    p_cn: float = 0.1                     # P(congested -> normal) per step
    base_latency: float = 5.0             # ms per message
    initial: LinkState = LinkState.NORMAL

    def __post_init__(self):
        self.initial = LinkState(self.initial)
        if not 0 < self.bandwidth_congested < self.bandwidth_normal:
            raise ConfigError("need 0 < bandwidth_congested < bandwidth_normal")
        if not (0.0 <= self.p_nc <= 1.0 and 0.0 <= self.p_cn <= 1.0):
            raise ConfigError("transition probabilities must be in [0, 1]")
        if self.base_latency < 0:
            raise ConfigError("base_latency must be >= 0")

    def bandwidth(self, state: LinkState) -> float:
        return self.bandwidth_congested if state is LinkState.CONGESTED else self.bandwidth_normal

    def latency(self, n_bytes: int, state: LinkState) -> float:
        return n_bytes / self.bandwidth(state) + self.base_latency

    @property
    def congested_fraction(self) -> float:
        """Stationary probability of the congested state."""
        total = self.p_nc + self.p_cn
        return self.p_nc / total if total else float(self.initial is LinkState.CONGESTED)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial"] = self.initial.value
        return d


def link_step(link: LinkModel, rng: np.random.Generator, state: LinkState | None = None) -> LinkState:
    """One Markov transition from ``state`` (the link's initial state when omitted)."""
    state = link.initial if state is None else LinkState(state)
    if state is LinkState.NORMAL:
        return LinkState.CONGESTED if rng.random() < link.p_nc else LinkState.NORMAL
    return LinkState.NORMAL if rng.random() < link.p_cn else LinkState.CONGESTED
