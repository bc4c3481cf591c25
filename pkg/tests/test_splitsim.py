import json

import numpy as np
import pandas as pd
import pytest

from cascade import Mode, augment, train_phase1, verify_ordering
from splitsim import (
    LinkModel,
    LinkState,
    OrchestratorPolicy,
    SimTrace,
    SimulationConfig,
    decode_message,
    encode_message,
    link_step,
    payload_bytes,
    policy_decide,
    run,
)
from splitsim.policy import Feedback
from utils.errors import ConfigError, ContractError

from conftest import small_cascade


# ---- link ----

def test_link_examples():
    rng = np.random.default_rng(0)
    calm = LinkModel(p_nc=0.0, p_cn=0.5)
    assert all(link_step(calm, rng, LinkState.NORMAL) is LinkState.NORMAL for _ in range(100))
    flip = LinkModel(p_nc=1.0, p_cn=1.0)
    assert link_step(flip, rng, LinkState.NORMAL) is LinkState.CONGESTED
    assert link_step(flip, rng, LinkState.CONGESTED) is LinkState.NORMAL
    assert link_step(flip, rng) is LinkState.CONGESTED


def test_link_stationary_fraction():
    link = LinkModel(p_nc=0.1, p_cn=0.3)
    rng = np.random.default_rng(7)
    state, congested = link.initial, 0
    steps = 100_000
    for _ in range(steps):
        state = link_step(link, rng, state)
        congested += state is LinkState.CONGESTED
    assert link.congested_fraction == pytest.approx(0.25)
    assert congested / steps == pytest.approx(0.25, abs=0.02)


def test_link_latency_and_validation():
    link = LinkModel(bandwidth_normal=100.0, bandwidth_congested=10.0, base_latency=2.0)
    assert link.latency(50, LinkState.NORMAL) == pytest.approx(2.5)
    assert link.latency(50, LinkState.CONGESTED) == pytest.approx(7.0)
    with pytest.raises(ConfigError):
        LinkModel(bandwidth_normal=10.0, bandwidth_congested=20.0)
    with pytest.raises(ConfigError):
        LinkModel(p_nc=1.5)


# ---- policy ----

GOOD = {Mode.INFORMATIVE: 0.9, Mode.COMPRESSED: 0.6}
POOR = {Mode.INFORMATIVE: 0.9, Mode.COMPRESSED: 0.1}


def test_policy_examples():
    policy = OrchestratorPolicy(accuracy_floor=0.5, hysteresis=3)
    assert policy_decide(policy, LinkState.CONGESTED, GOOD, 5) is Mode.COMPRESSED
    assert policy_decide(policy, LinkState.NORMAL, GOOD, 5, Mode.COMPRESSED) is Mode.INFORMATIVE
    assert policy_decide(policy, LinkState.CONGESTED, POOR, 5) is Mode.INFORMATIVE


def test_policy_hysteresis():
    policy = OrchestratorPolicy(accuracy_floor=0.5, hysteresis=3)
    assert policy_decide(policy, LinkState.CONGESTED, GOOD, 2, Mode.INFORMATIVE) is Mode.INFORMATIVE
    assert policy_decide(policy, LinkState.CONGESTED, GOOD, 3, Mode.INFORMATIVE) is Mode.COMPRESSED
    assert policy_decide(policy, LinkState.NORMAL, GOOD, 1, Mode.COMPRESSED) is Mode.COMPRESSED


def test_forced_policy():
    policy = OrchestratorPolicy(forced="compressed")
    assert policy_decide(policy, LinkState.NORMAL, POOR, 0) is Mode.COMPRESSED
    with pytest.raises(ConfigError):
        OrchestratorPolicy(hysteresis=0)


def test_feedback_publishes_every_period():
    fb = Feedback(OrchestratorPolicy(feedback_period=2, feedback_window=4), prior={"compressed": 0.4})
    assert fb.published[Mode.COMPRESSED] == 0.4
    fb.observe(0, Mode.COMPRESSED, 1.0)
    assert fb.published[Mode.COMPRESSED] == 0.4
    fb.observe(1, Mode.COMPRESSED, 0.0)
    assert fb.published[Mode.COMPRESSED] == 0.5
    fb.observe(2, Mode.INFORMATIVE, 0.8)
    fb.observe(3, Mode.INFORMATIVE, 0.8)
    assert fb.published[Mode.COMPRESSED] == 0.5
    fb.observe(4, Mode.INFORMATIVE, 0.8)
    fb.observe(5, Mode.INFORMATIVE, 0.8)
    assert fb.published[Mode.INFORMATIVE] == pytest.approx(0.8)
    # both compressed reports have left the window
    assert fb.published[Mode.COMPRESSED] == 0.4


def test_low_compressed_accuracy_is_retried_after_window():
    policy = OrchestratorPolicy(accuracy_floor=0.5, hysteresis=1, feedback_period=1, feedback_window=3)
    fb = Feedback(policy)
    fb.observe(0, Mode.COMPRESSED, 0.0)
    assert policy_decide(policy, LinkState.CONGESTED, fb.published, 5, Mode.COMPRESSED) is Mode.INFORMATIVE
    for step in range(1, 4):
        fb.observe(step, Mode.INFORMATIVE, 0.9)
    assert fb.published[Mode.COMPRESSED] == 1.0
    assert policy_decide(policy, LinkState.CONGESTED, fb.published, 5, Mode.INFORMATIVE) is Mode.COMPRESSED


# ---- wire ----

def test_wire_messages():
    code = np.array([0.5, -1.25, 3.0])
    message = encode_message(Mode.COMPRESSED, code)
    assert len(message) == 5 + 12
    mode, received = decode_message(message)
    assert mode is Mode.COMPRESSED
    np.testing.assert_array_equal(received, code)


def test_wire_rejects_bad_messages():
    message = encode_message("informative", np.zeros(4))
    with pytest.raises(ContractError):
        decode_message(message[:-1])
    with pytest.raises(ContractError):
        decode_message(b"\x07" + message[1:])
    with pytest.raises(ContractError):
        decode_message(b"\x00")


# ---- simulator ----

def _run(model, data, forced=None, steps=120, seed=3):
    link = LinkModel(p_nc=0.2, p_cn=0.2)
    policy = OrchestratorPolicy(accuracy_floor=0.0, hysteresis=2, feedback_period=5, forced=forced)
    return run(model, data, link, policy, steps, seed=seed)


def test_payload_ratio_quarter(small_dataset):
    train, _, _, _ = small_dataset
    cfg = small_cascade(encoder_sizes=(8,), bottleneck=2)
    model = augment(train_phase1(train, cfg, epochs=0))
    assert payload_bytes(Mode.COMPRESSED, model) / payload_bytes(Mode.INFORMATIVE, model) == 0.25


def test_forced_baselines_and_adaptive_in_between(trained, small_dataset):
    _, phase2, _ = trained
    _, test, _, _ = small_dataset
    info = _run(phase2, test, forced="informative").summary
    comp = _run(phase2, test, forced="compressed").summary
    adaptive = _run(phase2, test).summary
    assert info["total_bytes"] == 120 * 24
    assert comp["total_bytes"] == 120 * 12
    assert comp["total_bytes"] <= adaptive["total_bytes"] <= info["total_bytes"]
    assert comp["mean_latency_ms"] <= adaptive["mean_latency_ms"] <= info["mean_latency_ms"]
    assert info["switch_count"] == comp["switch_count"] == 0
    assert adaptive["switch_count"] > 0
    assert info["congested_steps"] == comp["congested_steps"] == adaptive["congested_steps"]


def test_informative_accuracy_matches_direct_inference(trained, small_dataset):
    _, phase2, _ = trained
    _, test, _, _ = small_dataset
    trace = _run(phase2, test, forced="informative", steps=len(test))
    code = phase2.encode(test.inputs, Mode.INFORMATIVE).astype(np.float32).astype(np.float64)
    expected = np.mean(phase2.decode(code, Mode.INFORMATIVE).argmax(axis=-1) == test.labels)
    assert trace.summary["accuracy"] == pytest.approx(expected, abs=1e-12)

    # float32 rounding on the wire may flip a near-tied argmax; allow 2% of predictions
    validation = verify_ordering(phase2, test).mode("informative").accuracy
    assert trace.summary["accuracy"] == pytest.approx(validation, abs=0.02)


@pytest.mark.parametrize("hysteresis", [1, 4, 15])
def test_switches_bounded_by_hysteresis(trained, small_dataset, hysteresis):
    _, phase2, _ = trained
    _, test, _, _ = small_dataset
    steps = 300
    link = LinkModel(p_nc=0.5, p_cn=0.5)
    policy = OrchestratorPolicy(accuracy_floor=0.0, hysteresis=hysteresis, feedback_period=5)
    trace = run(phase2, test, link, policy, steps, seed=11)
    assert trace.summary["switch_count"] <= steps // hysteresis
    modes = trace.rows["mode"].tolist()
    changes = [i for i in range(1, steps) if modes[i] != modes[i - 1]]
    assert all(b - a >= hysteresis for a, b in zip(changes, changes[1:]))


def test_simulation_is_deterministic(trained, small_dataset):
    _, phase2, _ = trained
    _, test, _, _ = small_dataset
    a, b = _run(phase2, test), _run(phase2, test)
    pd.testing.assert_frame_equal(a.rows, b.rows)
    assert a.summary == b.summary
    assert not _run(phase2, test, seed=4).rows.equals(a.rows)


def test_aggregates_recompute_from_rows(trained, small_dataset, tmp_path):
    _, phase2, _ = trained
    _, test, _, _ = small_dataset
    trace = _run(phase2, test)
    csv_path, json_path = trace.write(tmp_path, "adaptive")
    rows = pd.read_csv(csv_path, dtype={"correct": str})
    summary = json.loads(json_path.read_text())
    recomputed = SimTrace.aggregate(rows, test.timesteps, summary["seed"])
    for key, value in recomputed.items():
        assert summary[key] == (pytest.approx(value) if isinstance(value, float) else value), key
    assert (rows["correct"].str.count("1") == rows["n_correct"]).all()
    assert rows["correct"].str.len().eq(test.timesteps).all()


def test_compressed_needs_augmented_model(trained, small_dataset):
    phase1, _, _ = trained
    _, test, _, _ = small_dataset
    with pytest.raises(ContractError):
        _run(phase1, test)
    trace = _run(phase1, test, forced="informative", steps=5)
    assert len(trace.rows) == 5


def test_simulation_config_from_dicts():
    cfg = SimulationConfig(steps=10, link={"p_nc": 0.3}, policy={"forced": "compressed"})
    assert cfg.link.p_nc == 0.3
    assert cfg.policy.forced is Mode.COMPRESSED
    with pytest.raises(ConfigError):
        SimulationConfig(steps=0)
