"""Two-phase cascaded training.

Phase 1 trains the encoder and the decoder end to end. ``augment`` freezes
them, appends the bottleneck LSTM layer A to the encoder and the dense entry
layer B to the decoder. Phase 2 trains A and B only; the shared head and the
skip path stay bit-identical.
"""
from __future__ import annotations

import copy
import logging
import math

import numpy as np
from tqdm import tqdm

from cascade.config import CascadeConfig
from cascade.model import CascadeModel
from nncore.layers import DenseLayer, LSTMLayer
from nncore.network import EncoderDecoder, backward, forward
from nncore.optim import make_optimizer
from nncore.records import ActivationRecorder
from utils.errors import ConfigError, ContractError, ShapeError, TrainingDivergedError
from utils.load_data import WindowDataset

logger = logging.getLogger(__name__)


def _arrays(data: WindowDataset) -> tuple[np.ndarray, np.ndarray]:
    if data.labels is None:
        raise ContractError("training data has no labels")
    if len(data) == 0:
        raise ContractError("training data is empty")
    return data.inputs, data.labels


def _run_epochs(
    model: CascadeModel,
    x: np.ndarray,
    y: np.ndarray,
    *,
    phase: int,
    epochs: int,
    depth: int,
    use_entry: bool,
    first_epoch: int,
    recorder: ActivationRecorder | None,
    record_layers,
):
    cfg = model.config
    net = model.network
    rng = np.random.default_rng([cfg.seed, phase])
    optimizer = make_optimizer(cfg.optimizer_config)
    params = net.parameters()
    n = x.shape[0]

    if recorder is not None:
        recorder.capture(net, first_epoch, phase=phase, depth=depth, use_entry=use_entry, layers=record_layers)

    for epoch in tqdm(range(1, epochs + 1), desc=f"phase {phase}", unit="epoch", disable=not cfg.progress):
        order = rng.permutation(n)
        losses, correct = [], 0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            net.zero_grad()
            probs, cache = forward(net, x[batch], depth=depth, use_entry=use_entry)
            loss = backward(net, cache, y[batch])
            if not math.isfinite(loss):
                raise TrainingDivergedError(phase, first_epoch + epoch)
            optimizer.step(params)
            losses.append(loss * batch.size)
            correct += int(np.count_nonzero(probs.argmax(axis=-1) == y[batch]))
        entry = {
            "epoch": first_epoch + epoch,
            "loss": math.fsum(losses) / n,
            "accuracy": correct / (n * y.shape[1]),
        }
        model.history[f"phase{phase}"].append(entry)
        logger.info("phase %d epoch %d loss %.4f accuracy %.3f", phase, entry["epoch"], entry["loss"], entry["accuracy"])
        if recorder is not None and recorder.wants(epoch, epochs):
            recorder.capture(
                net, first_epoch + epoch, phase=phase, depth=depth, use_entry=use_entry, layers=record_layers
            )


def train_phase1(
    data: WindowDataset,
    cfg: CascadeConfig,
    recorder: ActivationRecorder | None = None,
    epochs: int | None = None,
) -> CascadeModel:
    """Train [encoder, decoder] end to end. ``epochs`` overrides cfg.epochs (0 leaves the initialization)."""
    x, y = _arrays(data)
    n_classes = data.schema.n_classes
    if int(y.max()) >= n_classes:
        raise ShapeError("labels", (f"< {n_classes}",), (int(y.max()),))
    net = EncoderDecoder.create(
        n_features=x.shape[2],
        timesteps=x.shape[1],
        encoder_sizes=cfg.encoder_sizes,
        decoder_sizes=cfg.decoder_sizes,
        n_classes=n_classes,
        rng=np.random.default_rng(cfg.seed),
        activation=cfg.activation,
    )
    model = CascadeModel(network=net, config=cfg)
    epochs = cfg.epochs if epochs is None else epochs
    _run_epochs(
        model, x, y, phase=1, epochs=epochs, depth=len(cfg.encoder_sizes), use_entry=False,
        first_epoch=0, recorder=recorder, record_layers=None,
    )
    return model


def augment(model: CascadeModel, cfg: CascadeConfig | None = None) -> CascadeModel:
    """Freeze the phase-1 network and attach bottleneck layer A and entry layer B."""
    if model.augmented:
        raise ContractError("model is already augmented")
    cfg = cfg or model.config
    model = copy.deepcopy(model)
    model.config = cfg
    net = model.network
    for p in net.parameters():
        p.frozen = True
    model.phase1_checksum = model.checksum_phase1()

    rng = np.random.default_rng([cfg.seed, 2])
    last = net.encoder[-1].cells
    layer_a = LSTMLayer.create(last, cfg.bottleneck, rng, name=f"encoder.{len(net.encoder) + 1}")
    layer_b = DenseLayer.create(cfg.bottleneck, net.code_size, cfg.activation, rng, name="decoder.entry")
    if layer_a.cells != layer_b.n_in or layer_b.n_out != net.code_size:
        raise ConfigError(f"layer A output ({layer_a.cells}) must equal layer B input ({layer_b.n_in})")
    net.encoder.append(layer_a)
    net.entry = layer_b
    logger.info("augmented encoder with %d-cell bottleneck; informative payload %d, compressed payload %d",
                cfg.bottleneck, last, cfg.bottleneck)
    return model


def train_phase2(
    model: CascadeModel,
    data: WindowDataset,
    cfg: CascadeConfig | None = None,
    recorder: ActivationRecorder | None = None,
    epochs: int | None = None,
) -> CascadeModel:
    """Train layers A and B through the frozen phase-1 encoder and shared head."""
    if not model.augmented:
        raise ContractError("train_phase2 needs an augmented model")
    cfg = cfg or model.config
    x, y = _arrays(data)
    model = copy.deepcopy(model)
    model.config = cfg
    epochs = cfg.epochs_phase2 if epochs is None else epochs
    first = model.history["phase1"][-1]["epoch"] if model.history["phase1"] else 0
    _run_epochs(
        model, x, y, phase=2, epochs=epochs, depth=model.phase1_depth + 1, use_entry=True,
        first_epoch=first, recorder=recorder, record_layers={model.phase1_depth + 1},
    )
    if model.checksum_phase1() != model.phase1_checksum:
        raise ContractError("phase-1 parameters changed during phase 2")
    return model
