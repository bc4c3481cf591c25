import numpy as np
import pytest

from cascade import CascadeConfig, augment, train_phase1, train_phase2
from nncore.records import ActivationRecorder, probe_indices
from utils.load_data import prepare_dataset
from utils.synthetic import SynthConfig, synth_generate


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


SMALL_SYNTH = dict(n_windows=240, timesteps=6, n_features=3, latent_dim=2, n_classes=4, noise=0.05)


def small_cascade(**overrides) -> CascadeConfig:
    params = dict(
        encoder_sizes=(8, 6), bottleneck=3, decoder_sizes=(5,), epochs=3, batch_size=32,
        probe_size=40, record_every=1, lr=1e-2, seed=0,
    )
    params.update(overrides)
    return CascadeConfig(**params)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """(train, test, schema, csv path) for a small synthetic set."""
    cfg = SynthConfig(**SMALL_SYNTH)
    out = tmp_path_factory.mktemp("synth")
    csv_path, _ = synth_generate(cfg).write(out)
    train, test, schema = prepare_dataset(csv_path, cfg.schema(), test_fraction=0.1, seed=0)
    return train, test, schema, csv_path


@pytest.fixture(scope="session")
def trained(small_dataset):
    """Phase-1 model, phase-2 model and the recorder shared by both phases."""
    train, _, _, _ = small_dataset
    cfg = small_cascade()
    probe = train.inputs[probe_indices(len(train), cfg.probe_size, cfg.seed)]
    recorder = ActivationRecorder(probe, every=cfg.record_every)
    phase1 = train_phase1(train, cfg, recorder=recorder)
    phase2 = train_phase2(augment(phase1), train, recorder=recorder)
    return phase1, phase2, recorder


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
