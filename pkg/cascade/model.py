"""Cascade model: one encoder, one shared decoder head, two entry paths."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cascade.config import CascadeConfig, Mode
from nncore.checkpoint import load_checkpoint, parameter_checksum, save_checkpoint
from nncore.layers import Parameter
from nncore.network import EncoderDecoder, decode, encode
from utils.errors import ContractError, ShapeError


@dataclass
class CascadeModel:
    network: EncoderDecoder
    config: CascadeConfig
    history: dict = field(default_factory=lambda: {"phase1": [], "phase2": []})
    phase1_checksum: str | None = None

    @property
    def phase1_depth(self) -> int:
        return len(self.config.encoder_sizes)

    @property
    def augmented(self) -> bool:
        return self.network.entry is not None and len(self.network.encoder) == self.phase1_depth + 1

    @property
    def phase1_trained(self) -> bool:
        return bool(self.history["phase1"])

    def phase1_parameters(self) -> list[Parameter]:
        params = []
        for layer in self.network.encoder[: self.phase1_depth]:
            params.extend(layer.parameters())
        for layer in self.network.head:
            params.extend(layer.parameters())
        return params

    def phase2_parameters(self) -> list[Parameter]:
        if not self.augmented:
            return []
        return self.network.encoder[self.phase1_depth].parameters() + self.network.entry.parameters()

    def checksum_phase1(self) -> str:
        return parameter_checksum(self.phase1_parameters())

    def payload_dim(self, mode) -> int:
        mode = Mode.parse(mode)
        if mode is Mode.INFORMATIVE:
            return self.network.encoder[self.phase1_depth - 1].cells
        self._require_augmented()
        return self.network.encoder[self.phase1_depth].cells

    def _require_augmented(self):
        if not self.augmented:
            raise ContractError("compressed mode needs an augmented model (run augment first)")

    def _route(self, mode) -> tuple[int, bool]:
        mode = Mode.parse(mode)
        if mode is Mode.INFORMATIVE:
            return self.phase1_depth, False
        self._require_augmented()
        return self.phase1_depth + 1, True

    def encode(self, x: np.ndarray, mode) -> np.ndarray:
        """UE side: windows (N, T, D) -> transmitted code (N, payload_dim)."""
        depth, _ = self._route(mode)
        return encode(self.network, x, depth)

    def decode(self, code: np.ndarray, mode) -> np.ndarray:
        """Edge side: received code -> per-timestep class probabilities (N, T, K)."""
        _, use_entry = self._route(mode)
        return decode(self.network, code, use_entry)

    def save(self, path):
        extra = {
            "cascade": self.config.to_dict(),
            "history": self.history,
            "phase1_checksum": self.phase1_checksum,
        }
        return save_checkpoint(self.network, path, extra=extra)

    @classmethod
    def load(cls, path) -> "CascadeModel":
        net, extra = load_checkpoint(path)
        model = cls(
            network=net,
            config=CascadeConfig.from_dict(extra["cascade"]),
            history=extra.get("history", {"phase1": [], "phase2": []}),
            phase1_checksum=extra.get("phase1_checksum"),
        )
        if model.phase1_checksum is not None and model.checksum_phase1() != model.phase1_checksum:
            raise ContractError(f"phase-1 parameters in {path} do not match their recorded checksum")
        return model


def infer(model: CascadeModel, window, mode) -> np.ndarray:
    """Per-timestep class probabilities for one window (T, D) or a batch (N, T, D)."""
    x = np.asarray(window, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise ShapeError("inference input", ("N", "T", "D"), x.shape)
    probs = model.decode(model.encode(x, mode), mode)
    return probs[0] if single else probs
