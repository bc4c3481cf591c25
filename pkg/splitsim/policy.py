"""Orchestrator: picks the latent code to transmit from link state and decoder feedback."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from cascade.config import Mode
from splitsim.link import LinkState
from utils.errors import ConfigError


@dataclass
class OrchestratorPolicy:
    accuracy_floor: float = 0.25
    hysteresis: int = 10          # minimum steps between two switches
    feedback_period: int = 10     # steps between accuracy reports from the edge
    feedback_window: int = 50     # steps of history each report summarizes
    forced: Mode | None = None

    def __post_init__(self):
        if self.forced is not None:
            self.forced = Mode.parse(self.forced)
        if self.hysteresis < 1:
            raise ConfigError("hysteresis must be >= 1")
        if self.feedback_period < 1 or self.feedback_window < 1:
            raise ConfigError("feedback_period and feedback_window must be >= 1")
        if not 0.0 <= self.accuracy_floor <= 1.0:
            raise ConfigError("accuracy_floor must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "accuracy_floor": self.accuracy_floor,
            "hysteresis": self.hysteresis,
            "feedback_period": self.feedback_period,
            "feedback_window": self.feedback_window,
            "forced": None if self.forced is None else self.forced.value,
        }


def policy_decide(
    policy: OrchestratorPolicy,
    link_state: LinkState,
    recent_accuracy: dict,
    steps_since_switch: int,
    current: Mode = Mode.INFORMATIVE,
) -> Mode:
    """Compressed only while congested and its reported accuracy meets the floor."""
    if policy.forced is not None:
        return policy.forced
    current = Mode.parse(current)
    congested = LinkState(link_state) is LinkState.CONGESTED
    good_enough = recent_accuracy.get(Mode.COMPRESSED, 0.0) >= policy.accuracy_floor
    wanted = Mode.COMPRESSED if congested and good_enough else Mode.INFORMATIVE
    if wanted is not current and steps_since_switch < policy.hysteresis:
        return current
    return wanted


class Feedback:
    """Edge-side accuracy per mode over a sliding window, published every ``period`` steps.

    A mode with no report left in the window falls back to its prior, so a
    mode that once dropped below the floor is tried again instead of being
    judged forever on stale reports.
    """

    def __init__(self, policy: OrchestratorPolicy, prior: dict | None = None):
        self.period = policy.feedback_period
        self.history: deque = deque(maxlen=policy.feedback_window)
        self.prior = {Mode.INFORMATIVE: 1.0, Mode.COMPRESSED: 1.0}
        for mode, value in (prior or {}).items():
            self.prior[Mode.parse(mode)] = float(value)
        self.published = dict(self.prior)

    def observe(self, step: int, mode: Mode, accuracy: float):
        self.history.append((mode, accuracy))
        if (step + 1) % self.period == 0:
            for m in Mode:
                seen = [a for mm, a in self.history if mm is m]
                self.published[m] = sum(seen) / len(seen) if seen else self.prior[m]
