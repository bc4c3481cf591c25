"""Per-epoch hidden-state recording on a fixed probe batch."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nncore.layers import dense_forward_cached, lstm_forward_cached
from nncore.network import EncoderDecoder, _check_input, _check_route, _decoder_input
from utils.errors import ArtifactError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerActivations:
    layer: int
    epoch: int
    phase: int
    name: str
    states: np.ndarray   # (n_samples, T, units); timestep t is states[:, t - 1]

    @property
    def timesteps(self) -> int:
        return self.states.shape[1]

    def at(self, t: int) -> np.ndarray:
        """H_t for 1-based t."""
        return self.states[:, t - 1]

    @property
    def final(self) -> np.ndarray:
        return self.states[:, -1]


def probe_indices(n_available: int, size: int, seed: int) -> np.ndarray:
    """Seeded, sorted probe selection; identical across epochs and phases."""
    size = min(size, n_available)
    rng = np.random.default_rng([seed, 0x9E37])
    return np.sort(rng.choice(n_available, size=size, replace=False))


def record_activations(
    net: EncoderDecoder,
    probe_x: np.ndarray,
    epoch: int,
    *,
    phase: int = 1,
    depth: int | None = None,
    use_entry: bool = False,
    include_decoder: bool = False,
) -> list[LayerActivations]:
    """One record per encoder layer (all timesteps), optionally per decoder layer too."""
    depth = len(net.encoder) if depth is None else depth
    _check_route(net, depth, use_entry)
    seq = _check_input(net, probe_x)
    records = []
    for k, layer in enumerate(net.encoder[:depth], start=1):
        seq, _, _ = lstm_forward_cached(seq, layer)
        records.append(LayerActivations(layer=k, epoch=epoch, phase=phase, name=f"encoder.{k}", states=seq))
    if include_decoder:
        code = seq[:, -1]
        if use_entry:
            code, _ = dense_forward_cached(code, net.entry)
        out = _decoder_input(net, code)
        for k, layer in enumerate(net.head, start=1):
            out, _ = dense_forward_cached(out, layer)
            records.append(
                LayerActivations(layer=depth + k, epoch=epoch, phase=phase, name=f"decoder.{k}", states=out)
            )
    return records


class ActivationRecorder:
    """Collects records for selected encoder layers during training."""

    def __init__(self, probe_x: np.ndarray, every: int = 1, include_decoder: bool = False):
        self.probe_x = np.asarray(probe_x, dtype=np.float64)
        self.every = max(1, int(every))
        self.include_decoder = include_decoder
        self.records: list[LayerActivations] = []

    def wants(self, epoch_in_phase: int, last_epoch_in_phase: int) -> bool:
        return epoch_in_phase == 0 or epoch_in_phase == last_epoch_in_phase or epoch_in_phase % self.every == 0

    def capture(self, net, epoch: int, *, phase: int, depth: int, use_entry: bool, layers=None):
        recs = record_activations(
            net, self.probe_x, epoch, phase=phase, depth=depth, use_entry=use_entry,
            include_decoder=self.include_decoder,
        )
        if layers is not None:
            recs = [r for r in recs if r.layer in layers]
        self.records.extend(recs)
        return recs


_ARCHIVE = re.compile(r"phase(\d+)_epoch(\d+)_layer(\d+)_(.+)\.npy$")


def save_records(records: list[LayerActivations], directory) -> list[Path]:
    """One ``.npy`` per record, named by phase, epoch, layer index and layer name.

    Plain ``.npy`` files carry no timestamps, so reruns produce identical bytes.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in sorted(records, key=lambda r: (r.phase, r.epoch, r.layer)):
        path = directory / f"phase{rec.phase}_epoch{rec.epoch:04d}_layer{rec.layer:02d}_{rec.name}.npy"
        try:
            np.save(path, np.ascontiguousarray(rec.states, dtype=np.float64), allow_pickle=False)
        except OSError as exc:
            raise ArtifactError(f"could not write activation record ({exc})", path) from exc
        written.append(path)
    logger.debug("wrote %d activation records to %s", len(written), directory)
    return written


def load_records(directory) -> list[LayerActivations]:
    directory = Path(directory)
    files = sorted(p for p in directory.glob("phase*_epoch*_layer*.npy") if _ARCHIVE.search(p.name))
    if not files:
        raise ArtifactError("no activation records found", directory)
    records = []
    for path in files:
        phase, epoch, layer, name = _ARCHIVE.search(path.name).groups()
        records.append(
            LayerActivations(
                layer=int(layer), epoch=int(epoch), phase=int(phase), name=name,
                states=np.load(path, allow_pickle=False),
            )
        )
    return records
