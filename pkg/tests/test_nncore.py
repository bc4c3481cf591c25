import numpy as np
import pytest

from nncore.checkpoint import load_checkpoint, parameter_checksum, save_checkpoint
from nncore.layers import DenseLayer, LSTMLayer, Parameter, dense_forward, lstm_forward
from nncore.network import EncoderDecoder, backward, cross_entropy, decode, encode, forward
from nncore.optim import OptimizerConfig, make_optimizer, optimizer_step
from nncore.records import load_records, probe_indices, record_activations, save_records
from utils.errors import ArtifactError, ConfigError, ContractError, NumericError, ShapeError


def _net(rng, with_entry=False):
    net = EncoderDecoder.create(
        n_features=2, timesteps=3, encoder_sizes=(4, 3), decoder_sizes=(4,), n_classes=3, rng=rng,
    )
    if with_entry:
        net.encoder.append(LSTMLayer.create(3, 2, rng, name="encoder.3"))
        net.entry = DenseLayer.create(2, 3, "tanh", rng, name="decoder.entry")
    return net


def _numeric_grad(net, x, y, param, depth, use_entry, eps=1e-5):
    grad = np.zeros_like(param.value)
    it = np.nditer(param.value, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = param.value[idx]
        param.value[idx] = old + eps
        plus = cross_entropy(forward(net, x, depth=depth, use_entry=use_entry)[0], y)
        param.value[idx] = old - eps
        minus = cross_entropy(forward(net, x, depth=depth, use_entry=use_entry)[0], y)
        param.value[idx] = old
        grad[idx] = (plus - minus) / (2 * eps)
    return grad


def _relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


def test_lstm_single_and_batch_shapes(rng):
    layer = LSTMLayer.create(2, 5, rng)
    seq = rng.standard_normal((7, 2))
    h, c = lstm_forward(seq, layer)
    assert h.shape == (7, 5) and c.shape == (7, 5)
    hb, _ = lstm_forward(np.stack([seq, seq]), layer)
    assert hb.shape == (2, 7, 5)
    np.testing.assert_allclose(hb[1], h)


def test_lstm_initial_state_is_used(rng):
    layer = LSTMLayer.create(2, 3, rng)
    seq = rng.standard_normal((4, 2))
    h_zero, _ = lstm_forward(seq, layer)
    h_init, _ = lstm_forward(seq, layer, h0=np.ones(3), c0=np.ones(3))
    assert not np.allclose(h_zero[0], h_init[0])


def test_lstm_rejects_wrong_width(rng):
    layer = LSTMLayer.create(2, 3, rng)
    with pytest.raises(ShapeError):
        lstm_forward(np.zeros((4, 5)), layer)
    with pytest.raises(ShapeError):
        lstm_forward(np.zeros((4, 2)), layer, h0=np.zeros(7))


def test_lstm_reports_nonfinite_timestep(rng):
    layer = LSTMLayer.create(2, 3, rng)
    seq = rng.standard_normal((1, 4, 2))
    seq[0, 1, 0] = np.nan
    with pytest.raises(NumericError) as info:
        lstm_forward(seq, layer)
    assert info.value.timestep == 2


def test_dense_time_distributed(rng):
    layer = DenseLayer.create(3, 2, "tanh", rng)
    x = rng.standard_normal((4, 5, 3))
    out = dense_forward(x, layer)
    assert out.shape == (4, 5, 2)
    np.testing.assert_allclose(out[2, 3], dense_forward(x[2, 3][None], layer)[0])


def test_dense_examples():
    zero = DenseLayer(Parameter(np.zeros((3, 2))), Parameter(np.zeros(3)), "tanh")
    np.testing.assert_array_equal(dense_forward(np.array([[0.4, -2.0]]), zero), np.zeros((1, 3)))
    identity = DenseLayer(Parameter(np.eye(2)), Parameter(np.zeros(2)), "linear")
    np.testing.assert_allclose(dense_forward(np.array([0.3, -0.7]), identity), [0.3, -0.7])
    layer = DenseLayer(Parameter([[1.0, 2.0], [3.0, 4.0]]), Parameter([0.5, -0.5]), "sigmoid")
    np.testing.assert_allclose(dense_forward(np.array([[1.0, 1.0]]), layer)[0], [0.97069, 0.99850], atol=1e-5)


def test_dense_softmax_rows_sum_to_one(rng):
    layer = DenseLayer.create(4, 5, "softmax", rng)
    out = dense_forward(rng.standard_normal((6, 3, 4)), layer)
    np.testing.assert_allclose(out.sum(axis=-1), 1.0, rtol=0, atol=1e-12)


def _lstm(cells, n_in, values):
    return LSTMLayer(
        W=Parameter(np.full((4, cells, n_in), values["W"])),
        U=Parameter(np.full((4, cells, cells), values["U"])),
        b=Parameter(np.array(values["b"], dtype=float).reshape(4, cells)),
    )


def test_lstm_all_zero_weights_give_zero_states(rng):
    layer = _lstm(3, 2, {"W": 0.0, "U": 0.0, "b": np.zeros((4, 3))})
    h, c = lstm_forward(rng.standard_normal((5, 2)), layer)
    assert not h.any() and not c.any()


def test_lstm_single_cell_closed_form():
    # gates saturated open, candidate fixed at 0.8
    b = [[20.0], [20.0], [np.arctanh(0.8)], [20.0]]
    layer = _lstm(1, 1, {"W": 0.0, "U": 0.0, "b": b})
    h, _ = lstm_forward(np.zeros((1, 1)), layer)
    assert h[0, 0] == pytest.approx(np.tanh(0.8), abs=1e-6)
    assert h[0, 0] == pytest.approx(0.66404, abs=1e-5)


def _reference_lstm(seq, W, U, b):
    """Step-by-step recurrence written out gate by gate."""
    def sig(v):
        return 1.0 / (1.0 + np.exp(-v))

    cells = b.shape[1]
    h, c = np.zeros(cells), np.zeros(cells)
    out = []
    for x_t in seq:
        i = sig(W[0] @ x_t + U[0] @ h + b[0])
        f = sig(W[1] @ x_t + U[1] @ h + b[1])
        g = np.tanh(W[2] @ x_t + U[2] @ h + b[2])
        o = sig(W[3] @ x_t + U[3] @ h + b[3])
        c = f * c + i * g
        h = o * np.tanh(c)
        out.append(h)
    return np.array(out)


def test_lstm_matches_reference_recurrence(rng):
    layer = LSTMLayer.create(3, 4, rng)
    seq = rng.standard_normal((3, 3))
    h, _ = lstm_forward(seq, layer)
    expected = _reference_lstm(seq, layer.W.value, layer.U.value, layer.b.value)
    np.testing.assert_allclose(h, expected, rtol=0, atol=1e-12)


def _seeded_net(seed):
    """Small net whose widths and route depend on ``seed``; odd seeds add the bottleneck route."""
    rng = np.random.default_rng(seed)
    sizes = (3 + seed % 3, 2 + seed % 2)
    net = EncoderDecoder.create(
        n_features=1 + seed % 3, timesteps=2 + seed % 3, encoder_sizes=sizes,
        decoder_sizes=(3 + seed % 2,), n_classes=2 + seed % 2, rng=rng,
    )
    with_entry = seed % 2 == 1
    if with_entry:
        net.encoder.append(LSTMLayer.create(sizes[-1], 1, rng, name="encoder.3"))
        net.entry = DenseLayer.create(1, sizes[-1], "tanh", rng, name="decoder.entry")
    x = rng.standard_normal((4, net.timesteps, net.n_features))
    y = rng.integers(0, net.n_classes, size=(4, net.timesteps))
    return net, x, y, len(net.encoder), with_entry


@pytest.mark.parametrize("seed", range(10))
def test_gradients_match_finite_differences(seed):
    net, x, y, depth, use_entry = _seeded_net(seed)
    net.zero_grad()
    _, cache = forward(net, x, depth=depth, use_entry=use_entry)
    backward(net, cache, y)
    for p in net.parameters():
        numeric = _numeric_grad(net, x, y, p, depth=depth, use_entry=use_entry)
        assert _relative_error(p.grad, numeric) < 1e-4, p.name


def test_duplicated_batch_keeps_mean_gradient(rng):
    net = _net(rng)
    x = rng.standard_normal((4, 3, 2))
    y = rng.integers(0, 3, size=(4, 3))
    net.zero_grad()
    backward(net, forward(net, x)[1], y)
    single = [p.grad.copy() for p in net.parameters()]
    net.zero_grad()
    backward(net, forward(net, np.concatenate([x, x]))[1], np.concatenate([y, y]))
    for p, g in zip(net.parameters(), single):
        np.testing.assert_allclose(p.grad, g, rtol=0, atol=1e-12, err_msg=p.name)


def test_certain_correct_prediction_has_zero_gradient(rng):
    net = _net(rng)
    out = net.head[-1]
    out.weights.value[...] = 0.0
    out.bias.value[...] = [1000.0, 0.0, 0.0]
    x = rng.standard_normal((3, 3, 2))
    net.zero_grad()
    probs, cache = forward(net, x)
    assert np.all(probs[..., 0] == 1.0)
    backward(net, cache, np.zeros((3, 3), dtype=int))
    for p in net.parameters():
        assert not p.grad.any(), p.name


def test_frozen_parameters_get_no_gradient(rng):
    net = _net(rng, with_entry=True)
    phase1 = [p for layer in net.encoder[:2] for p in layer.parameters()] + [
        p for layer in net.head for p in layer.parameters()
    ]
    for p in phase1:
        p.frozen = True
    x = rng.standard_normal((4, 3, 2))
    y = rng.integers(0, 3, size=(4, 3))
    net.zero_grad()
    _, cache = forward(net, x, depth=3, use_entry=True)
    backward(net, cache, y)
    for p in phase1:
        assert not p.grad.any(), p.name
    for p in net.encoder[2].parameters() + net.entry.parameters():
        numeric = _numeric_grad(net, x, y, p, depth=3, use_entry=True)
        assert _relative_error(p.grad, numeric) < 1e-5, p.name


def test_encode_decode_matches_forward(rng):
    net = _net(rng, with_entry=True)
    x = rng.standard_normal((3, 3, 2))
    probs, _ = forward(net, x, depth=3, use_entry=True)
    np.testing.assert_allclose(decode(net, encode(net, x, 3), use_entry=True), probs)
    np.testing.assert_allclose(probs.sum(axis=-1), 1.0)


def test_route_checks(rng):
    net = _net(rng)
    x = rng.standard_normal((2, 3, 2))
    with pytest.raises(ContractError):
        forward(net, x, use_entry=True)
    with pytest.raises(ContractError):
        encode(net, x, 5)
    with pytest.raises(ShapeError):
        forward(net, rng.standard_normal((2, 4, 2)))


def test_adam_skips_frozen_and_descends():
    target = np.array([1.0, -2.0])
    free = Parameter(np.zeros(2), name="free")
    frozen = Parameter(np.ones(2), name="frozen", frozen=True)
    cfg = OptimizerConfig(kind="adam", lr=0.1)
    opt = make_optimizer(cfg)
    for _ in range(300):
        free.grad = 2 * (free.value - target)
        frozen.grad = np.ones(2)
        opt.step([free, frozen])
    np.testing.assert_allclose(free.value, target, atol=5e-2)
    np.testing.assert_array_equal(frozen.value, np.ones(2))


def test_adam_first_step_moves_by_lr():
    p = Parameter(np.zeros(3), name="p")
    p.grad = np.array([0.3, -2.0, 1e-3])
    optimizer_step([p], OptimizerConfig(kind="adam", lr=0.01))
    np.testing.assert_allclose(p.value, [-0.01, 0.01, -0.01], rtol=1e-4)


def test_sgd_step():
    p = Parameter(np.array([1.0]), name="p")
    p.grad = np.array([0.5])
    optimizer_step([p], OptimizerConfig(kind="sgd", lr=0.01))
    assert p.value[0] == pytest.approx(0.995)


def test_optimizer_config_validation():
    with pytest.raises(ConfigError):
        OptimizerConfig(lr=0.0)
    with pytest.raises(ConfigError):
        OptimizerConfig(kind="rmsprop")


def test_checkpoint_is_bit_exact(rng, tmp_path):
    net = _net(rng, with_entry=True)
    net.encoder[0].W.frozen = True
    path = save_checkpoint(net, tmp_path / "net.json", extra={"note": "x"})
    loaded, extra = load_checkpoint(path)
    assert extra == {"note": "x"}
    assert parameter_checksum(loaded.parameters()) == parameter_checksum(net.parameters())
    assert loaded.encoder[0].W.frozen
    x = rng.standard_normal((2, 3, 2))
    np.testing.assert_array_equal(forward(loaded, x, 3, True)[0], forward(net, x, 3, True)[0])


def test_checkpoint_errors(rng, tmp_path):
    with pytest.raises(ArtifactError):
        load_checkpoint(tmp_path / "missing.json")
    path = save_checkpoint(_net(rng), tmp_path / "net.json")
    path.write_text(path.read_text().replace('"format_version": 1', '"format_version": 99'))
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_probe_indices_are_stable():
    a = probe_indices(100, 20, seed=3)
    assert np.array_equal(a, probe_indices(100, 20, seed=3))
    assert np.all(np.diff(a) > 0)
    assert probe_indices(5, 20, seed=3).size == 5


def test_records_round_trip(rng, tmp_path):
    net = _net(rng)
    probe = rng.standard_normal((6, 3, 2))
    recs = record_activations(net, probe, epoch=4, include_decoder=True)
    assert [r.name for r in recs] == ["encoder.1", "encoder.2", "decoder.1", "decoder.2"]
    assert recs[0].states.shape == (6, 3, 4)
    assert recs[2].layer == 3
    np.testing.assert_array_equal(recs[1].at(3), recs[1].final)

    save_records(recs, tmp_path)
    loaded = load_records(tmp_path)
    by_name = {r.name: r for r in loaded}
    for r in recs:
        np.testing.assert_array_equal(by_name[r.name].states, r.states)
        assert by_name[r.name].epoch == 4


def test_load_records_empty_dir(tmp_path):
    with pytest.raises(ArtifactError):
        load_records(tmp_path)
