"""Step-by-step split inference over a simulated link.

Each step the UE encodes one window, the orchestrator picks the code to
send, the message is serialized, delivered over the link, parsed at the edge
and decoded, and the prediction is scored against the window's labels.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from cascade.config import Mode
from cascade.model import CascadeModel
from splitsim.link import LinkModel, LinkState, link_step
from splitsim.policy import Feedback, OrchestratorPolicy, policy_decide
from splitsim.wire import HEADER, decode_message, encode_message
from utils.errors import ArtifactError, ConfigError, ContractError
from utils.load_data import WindowDataset

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["step", "window", "link_state", "mode", "payload_bytes", "latency_ms", "n_correct", "correct"]


def payload_bytes(mode, model: CascadeModel) -> int:
    """Bytes of latent payload for one message: code dimension times 4."""
    return model.payload_dim(mode) * 4


@dataclass
class SimulationConfig:
    steps: int = 1000
    seed: int = 0
    link: LinkModel = field(default_factory=LinkModel)
    policy: OrchestratorPolicy = field(default_factory=OrchestratorPolicy)

    def __post_init__(self):
        if isinstance(self.link, dict):
            self.link = LinkModel(**self.link)
        if isinstance(self.policy, dict):
            self.policy = OrchestratorPolicy(**self.policy)
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")

    def to_dict(self) -> dict:
        return {"steps": self.steps, "seed": self.seed, "link": self.link.to_dict(), "policy": self.policy.to_dict()}


@dataclass
class SimTrace:
    rows: pd.DataFrame
    summary: dict

    @staticmethod
    def aggregate(rows: pd.DataFrame, timesteps: int, seed: int) -> dict:
        """Aggregates as a pure function of the rows."""
        accuracy = {}
        counts = {}
        for mode in Mode:
            part = rows[rows["mode"] == mode.value]
            counts[mode.value] = int(len(part))
            accuracy[mode.value] = (
                math.fsum(part["n_correct"].tolist()) / (len(part) * timesteps) if len(part) else None
            )
        modes = rows["mode"].tolist()
        return {
            "seed": seed,
            "steps": int(len(rows)),
            "total_bytes": int(sum(int(b) for b in rows["payload_bytes"])),
            "mean_latency_ms": math.fsum(rows["latency_ms"].tolist()) / len(rows),
            "accuracy": math.fsum(rows["n_correct"].tolist()) / (len(rows) * timesteps),
            "accuracy_by_mode": accuracy,
            "steps_by_mode": counts,
            "switch_count": sum(1 for a, b in zip(modes, modes[1:]) if a != b),
            "congested_steps": int((rows["link_state"] == LinkState.CONGESTED.value).sum()),
        }

    def write(self, out_dir, name: str = "trace") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        csv_path, json_path = out_dir / f"{name}.csv", out_dir / f"{name}.json"
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            self.rows.to_csv(csv_path, index=False)
            json_path.write_text(json.dumps(self.summary, indent=2, sort_keys=True))
        except OSError as exc:
            raise ArtifactError(f"could not write trace ({exc})", out_dir) from exc
        return csv_path, json_path


def _stream(windows) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(windows, WindowDataset):
        if windows.labels is None:
            raise ContractError("simulation stream has no labels")
        return windows.inputs, windows.labels
    windows = list(windows)
    if not windows:
        raise ContractError("simulation stream is empty")
    return np.stack([w.inputs for w in windows]), np.stack([w.targets for w in windows])


def run(
    model: CascadeModel,
    windows,
    link: LinkModel,
    policy: OrchestratorPolicy,
    steps: int,
    seed: int = 0,
    prior_accuracy: dict | None = None,
) -> SimTrace:
    """Simulate ``steps`` messages; the stream is replayed cyclically if shorter."""
    x, y = _stream(windows)
    if x.shape[0] == 0:
        raise ContractError("simulation stream is empty")
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    if policy.forced is not Mode.INFORMATIVE and not model.augmented:
        raise ContractError("the compressed path needs an augmented model")

    rng = np.random.default_rng(seed)
    feedback = Feedback(policy, prior_accuracy)
    state = link.initial
    current = policy.forced or Mode.INFORMATIVE
    since_switch = 0
    rows = []
    for step in range(steps):
        if step:
            state = link_step(link, rng, state)
        mode = policy_decide(policy, state, feedback.published, since_switch, current)
        if mode is not current:
            logger.debug("step %d: switch %s -> %s (%s)", step, current.value, mode.value, state.value)
            current, since_switch = mode, 0
        since_switch += 1

        i = step % x.shape[0]
        code = model.encode(x[i : i + 1], mode)[0]
        message = encode_message(mode, code)
        received_mode, received = decode_message(message)
        probs = model.decode(received[None], received_mode)[0]
        hits = probs.argmax(axis=-1) == y[i]
        n_bytes = len(message) - HEADER.size
        feedback.observe(step, mode, float(hits.mean()))
        rows.append({
            "step": step,
            "window": i,
            "link_state": state.value,
            "mode": mode.value,
            "payload_bytes": n_bytes,
            "latency_ms": link.latency(n_bytes, state),
            "n_correct": int(hits.sum()),
            "correct": "".join("1" if h else "0" for h in hits),
        })

    frame = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    summary = SimTrace.aggregate(frame, y.shape[1], seed)
    summary["policy"] = policy.to_dict()
    summary["link"] = link.to_dict()
    logger.info("simulated %d steps: %d bytes, accuracy %.3f, %d switches",
                steps, summary["total_bytes"], summary["accuracy"], summary["switch_count"])
    return SimTrace(rows=frame, summary=summary)
