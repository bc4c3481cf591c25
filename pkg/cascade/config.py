from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

from nncore.optim import OptimizerConfig
from utils.errors import ConfigError, ContractError


class Mode(str, Enum):
    """Which latent code the UE transmits."""

    INFORMATIVE = "informative"   # z, final state of the last phase-1 layer
    COMPRESSED = "compressed"     # z', final state of the bottleneck layer

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"unknown mode {value!r}; expected one of {[m.value for m in cls]}") from None


@dataclass
class CascadeConfig:
    encoder_sizes: tuple[int, ...] = (128, 128)
    bottleneck: int = 32
    decoder_sizes: tuple[int, ...] = (64,)
    epochs: int = 30
    phase2_epochs: int | None = None
    lr: float = 1e-2
    batch_size: int = 256
    optimizer: str = "adam"
    seed: int = 0
    activation: str = "tanh"
    probe_size: int = 256
    record_every: int = 2
    record_decoder: bool = False
    # ordering verification
    slack_accuracy: float = 0.02
    slack_bits: float = 0.2
    min_gap: float = 0.0
    progress: bool = False

    def __post_init__(self):
        self.encoder_sizes = tuple(int(s) for s in self.encoder_sizes)
        self.decoder_sizes = tuple(int(s) for s in self.decoder_sizes)
        if not self.encoder_sizes or min(self.encoder_sizes) < 1:
            raise ConfigError("encoder_sizes needs at least one positive layer size")
        if self.decoder_sizes and min(self.decoder_sizes) < 1:
            raise ConfigError("decoder_sizes must be positive")
        if not 1 <= self.bottleneck < self.encoder_sizes[-1]:
            raise ConfigError(
                f"bottleneck ({self.bottleneck}) must be smaller than the last encoder layer "
                f"({self.encoder_sizes[-1]})"
            )
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.phase2_epochs is not None and self.phase2_epochs < 1:
            raise ConfigError("phase2_epochs must be >= 1")
        if self.batch_size < 1 or self.probe_size < 1 or self.record_every < 1:
            raise ConfigError("batch_size, probe_size and record_every must be >= 1")
        if min(self.slack_accuracy, self.slack_bits, self.min_gap) < 0:
            raise ConfigError("slacks and min_gap must be >= 0")
        OptimizerConfig(kind=self.optimizer, lr=self.lr)

    @property
    def epochs_phase2(self) -> int:
        return self.epochs if self.phase2_epochs is None else self.phase2_epochs

    @property
    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(kind=self.optimizer, lr=self.lr)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["encoder_sizes"] = list(self.encoder_sizes)
        d["decoder_sizes"] = list(self.decoder_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CascadeConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown cascade keys: {sorted(unknown)}")
        return cls(**d)
