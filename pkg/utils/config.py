"""Run configuration: one JSON document covering every subcommand.

Values come from defaults, then an optional ``--config`` file, then command
line flags. The effective configuration is written into the output directory
of every run.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

from cascade.config import CascadeConfig
from estimators.base import ESTIMATORS
from infoplane.plane import AnalysisConfig
from splitsim.simulator import SimulationConfig
from utils.errors import ArtifactError, ConfigError
from utils.load_data import DatasetSchema
from utils.synthetic import SynthConfig

logger = logging.getLogger(__name__)

_SECTIONS = {
    "synth": SynthConfig,
    "schema": DatasetSchema,
    "cascade": CascadeConfig,
    "analysis": AnalysisConfig,
    "simulation": SimulationConfig,
}

# schema fields that follow the synth section unless set explicitly
SYNCED_SCHEMA_KEYS = ("timesteps", "n_classes")


@dataclass
class RunConfig:
    seed: int = 0
    out: str = "runs/default"
    dataset: str | None = None          # defaults to <out>/dataset.csv
    test_fraction: float = 0.1
    estimate_input: str | None = None
    estimators: tuple[str, ...] = ("gcmi",)
    synth: SynthConfig = field(default_factory=SynthConfig)
    schema: DatasetSchema = field(default_factory=DatasetSchema)
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    def __post_init__(self):
        self.estimators = tuple(self.estimators)
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigError(f"unknown estimators {unknown}; choose from {list(ESTIMATORS)}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must be in (0, 1)")
        self.propagate_seed()

    def propagate_seed(self):
        """The global seed drives every seeded component."""
        self.synth.seed = self.seed
        self.cascade.seed = self.seed
        self.analysis.seed = self.seed
        self.simulation.seed = self.seed

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def dataset_path(self) -> Path:
        return Path(self.dataset) if self.dataset else self.out_dir / "dataset.csv"

    def check_dataset_sidecar(self):
        """Reject a window length or class count that disagrees with the dataset's own sidecar."""
        path = self.dataset_path.with_suffix(".json")
        if not path.exists():
            return
        try:
            described = json.loads(path.read_text()).get("schema") or {}
        except (OSError, ValueError) as exc:
            raise ArtifactError(f"unreadable dataset sidecar ({exc})", path) from exc
        for key in SYNCED_SCHEMA_KEYS:
            if key in described and described[key] != getattr(self.schema, key):
                raise ConfigError(
                    f"schema.{key}={getattr(self.schema, key)} but {path} describes {key}={described[key]}"
                )

    def to_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "out": self.out,
            "dataset": self.dataset,
            "test_fraction": self.test_fraction,
            "estimate_input": self.estimate_input,
            "estimators": list(self.estimators),
        }
        for name in _SECTIONS:
            d[name] = getattr(self, name).to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in d.items():
            section = _SECTIONS.get(key)
            if section is None:
                kwargs[key] = value
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            kwargs[key] = _section_from_dict(section, value)
        return cls(**kwargs)

    def write(self, directory, name: str) -> Path:
        path = Path(directory) / f"config_{name}.json"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        except OSError as exc:
            raise ArtifactError(f"could not write config ({exc})", path) from exc
        return path


def _section_from_dict(section, value: dict):
    if hasattr(section, "from_dict"):
        return section.from_dict(value)
    allowed = {f.name for f in fields(section)}
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for {section.__name__}: {sorted(unknown)}")
    try:
        return section(**value)
    except TypeError as exc:
        raise ConfigError(f"invalid {section.__name__}: {exc}") from exc


def _merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then ``overrides`` (nested dicts merge).

    ``schema.timesteps`` and ``schema.n_classes`` are copied from the synth
    section unless either layer sets them.
    """
    data = RunConfig().to_dict()
    from_file: dict = {}
    if path is not None:
        path = Path(path)
        try:
            from_file = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON ({exc})") from exc
        if not isinstance(from_file, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        data = _merge(data, from_file)
    overrides = overrides or {}
    data = _merge(data, overrides)

    explicit = set()
    for layer in (from_file, overrides):
        if isinstance(layer.get("schema"), dict):
            explicit |= set(layer["schema"])
    if isinstance(data.get("synth"), dict) and isinstance(data.get("schema"), dict):
        for key in SYNCED_SCHEMA_KEYS:
            if key not in explicit and key in data["synth"]:
                data["schema"][key] = data["synth"][key]
    return RunConfig.from_dict(data)
