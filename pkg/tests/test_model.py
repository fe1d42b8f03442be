import numpy as np
import pytest
import torch
from conftest import small_sim_config, tiny_model_config, toy_dataset

from dnts.config import Config, DataConfig, ModelConfig
from dnts.data import build_examples, make_example_input
from dnts.errors import ConfigError, ShapeError, UnknownModeError
from dnts.network import (
    CoefficientDecoder,
    DNTSModel,
    HypergraphEncoder,
    LocalEncoder,
    SignalGraphConv,
    TemporalConvolution,
    activation_filter,
    build_model,
    fuse,
    synthesize,
)
from dnts.simkit import generate_orders, generate_trace, oracle_activation_ratio


def test_temporal_output_shape_and_sign():
    temporal = TemporalConvolution(window=7, horizon=2, kernel_sizes=(2, 3, 6, 7), channels=8, num_layers=2)
    temporal.initialize_weights()
    X_hat = temporal(torch.rand(5, 7) * 10)
    assert X_hat.shape == (5, 2)
    assert bool((X_hat >= 0).all())


def test_temporal_shape_errors():
    with pytest.raises(ShapeError):
        TemporalConvolution(window=3, horizon=1, kernel_sizes=(2, 7), channels=4)
    temporal = TemporalConvolution(window=4, horizon=1, kernel_sizes=(2, 3), channels=4)
    with pytest.raises(ShapeError):
        temporal(torch.rand(3, 5))


def test_local_encoder_without_descendants_is_identity():
    encoder = LocalEncoder(4, 3, 5, 4)
    h = torch.randn(6, 4)
    empty = torch.zeros(0, dtype=torch.long)
    assert torch.equal(encoder.conv_step(h, torch.randn(3), empty, empty), h)


def test_local_encoder_single_descendant_message():
    encoder = LocalEncoder(4, 3, 5, 4)
    encoder.initialize_weights()
    h, r = torch.randn(3, 4), torch.randn(3)
    out = encoder.conv_step(h, r, torch.tensor([0]), torch.tensor([2]))
    message = encoder.message(torch.cat([h[2], encoder.item_proj(r)]))
    torch.testing.assert_close(out[0], h[0] + message)
    torch.testing.assert_close(out[1:], h[1:])


def test_local_encoder_output_shape():
    encoder = LocalEncoder(4, 3, 5, 4)
    pairs = torch.tensor([[0, 0, 1], [0, 1, 0], [1, 2, 2]])
    assert encoder(torch.randn(3, 4), torch.randn(3), pairs, num_days=2).shape == (3, 5)


def test_signal_graph_conv_without_pairs_is_identity():
    conv = SignalGraphConv(feature_dim=4, window=3, attention_dim=4)
    x = torch.rand(5, 3)
    assert torch.equal(conv(x, torch.randn(5, 4), torch.zeros((3, 0), dtype=torch.long)), x)


def test_signal_graph_conv_merges_days_into_static_graph():
    conv = SignalGraphConv(feature_dim=4, window=3, attention_dim=4)
    conv.initialize_weights()
    x, H_hat = torch.rand(3, 3), torch.randn(3, 4)
    pairs = torch.tensor([[0, 1, 2], [0, 0, 0], [2, 2, 2]])  # root 0 reaches 2 on every day
    assert SignalGraphConv.static_pairs(pairs).tolist() == [[0], [2]]
    out = conv(x, H_hat, pairs)
    torch.testing.assert_close(out[0], x[0] + conv.neighbor(x[2]))
    torch.testing.assert_close(out[1:], x[1:])


@pytest.mark.parametrize("use_gcn", [True, False])
def test_single_stage_signal_convolution(use_gcn):
    dataset = toy_dataset()
    config = tiny_model_config(temporal_channels=8)
    model = DNTSModel(config, dataset.num_promoters, dataset.num_items, 3, 1, mode="p2p", use_gcn=use_gcn).double()
    model.eval()
    assert (model.head.graph_conv is not None) == use_gcn

    example = dataset.examples["train"][0]
    inputs = make_example_input(example, dataset, 3, np.random.default_rng(0), "propagation", dtype=torch.float64)
    root, desc = inputs.message_pairs[1:, 0].tolist()
    bumped = inputs.signal.clone()
    bumped[desc] += 5.0
    hypergraph = dataset.hypergraph(example.input_days)
    with torch.no_grad():
        base = model(inputs, hypergraph).y_hat
        moved = model(inputs._replace(signal=bumped), hypergraph).y_hat
    assert bool(torch.allclose(base[root], moved[root])) != use_gcn


def test_hyperedge_with_single_promoter():
    encoder = HypergraphEncoder(d_m=4, d_r=3, hidden_dim=5, attention_dim=4)
    encoder.initialize_weights()
    h, r = torch.randn(3, 4), torch.randn(2, 3)
    r_prime = encoder.hyperedge_aggregate(h, r, torch.tensor([1]), torch.tensor([0]))
    assert r_prime.shape == (2, 7)
    torch.testing.assert_close(r_prime[0, :4], torch.sigmoid(h[1]))
    assert r_prime[1, :4].abs().sum().item() == 0.0
    torch.testing.assert_close(r_prime[:, 4:], encoder.item_proj(r))


def test_promoter_aggregate_is_non_negative():
    encoder = HypergraphEncoder(d_m=4, d_r=3, hidden_dim=5, attention_dim=4)
    r_prime = torch.randn(3, 7)
    out = encoder.promoter_aggregate(r_prime, torch.tensor([0, 0, 2]), torch.tensor([0, 1, 1]), num_promoters=4)
    assert out.shape == (4, 4)
    assert bool((out >= 0).all())
    assert out[1].abs().sum().item() == 0.0


def test_fuse_puts_global_first():
    h_local, h_global = torch.zeros(3, 2), torch.ones(3, 4)
    fused = fuse(h_local, h_global)
    assert fused.shape == (3, 6)
    assert fused[:, :4].sum().item() == 12.0


def test_decoder_closed_gate_gives_zero_coefficients():
    decoder = CoefficientDecoder(feature_dim=3, horizon=2)
    decoder.initialize_weights()
    with torch.no_grad():
        decoder.W3.copy_(-10.0 * torch.eye(3).expand(2, 3, 3))
    decoder.eval()
    H = torch.ones(4, 3)
    _, S_gate, S_ratio, S_hat, active_logits = decoder(H)
    assert S_hat.abs().sum().item() == 0.0
    assert bool(((S_ratio > 0) & (S_ratio < 1)).all())
    assert active_logits.shape == (4, 2)


def test_decoder_diagonal_is_zero_and_eval_gate_is_binary():
    decoder = CoefficientDecoder(feature_dim=3, horizon=1, hard_gate=True)
    decoder.initialize_weights()
    with torch.no_grad():
        decoder.W3.normal_(std=1.0)
    decoder.eval()
    _, S_gate, _, S_hat, _ = decoder(torch.randn(5, 3))
    assert set(S_gate.unique().tolist()) <= {0.0, 1.0}
    assert torch.diagonal(S_hat, dim1=-2, dim2=-1).abs().sum().item() == 0.0


def test_activation_filter_zeroes_inactive_rows():
    S = torch.rand(1, 3, 3)
    l_hat = torch.tensor([[0.2], [0.7], [0.5]])
    filtered = activation_filter(S, l_hat, delta=0.5)
    assert filtered[0, 0].abs().sum().item() == 0.0
    torch.testing.assert_close(filtered[0, 1], 0.7 * S[0, 1])
    torch.testing.assert_close(filtered[0, 2], 0.5 * S[0, 2])
    assert activation_filter(S, torch.full((3, 1), 0.9), delta=0.95).abs().sum().item() == 0.0
    with pytest.raises(ShapeError):
        activation_filter(S, torch.rand(3, 2), 0.5)


def test_activation_filter_gradient_ignores_filtered_rows():
    S = torch.rand(1, 2, 2)
    l_hat = torch.tensor([[0.2], [0.9]], requires_grad=True)
    activation_filter(S, l_hat, 0.5).sum().backward()
    assert l_hat.grad[0].item() == 0.0
    assert l_hat.grad[1].item() > 0.0


def test_synthesize_toy_network():
    S = torch.tensor([[[0.0, 1.0, 1.0, 1.0], [0.0, 0.0, 0.0, 1.0], [0.0] * 4, [0.0] * 4]])
    X = torch.tensor([[0.0], [0.0], [4.0], [2.0]])
    assert synthesize(S, X).flatten().tolist() == [6.0, 2.0, 0.0, 0.0]


def test_synthesize_identity_and_loop_oracle():
    X = torch.rand(5, 3, dtype=torch.float64)
    identity = torch.eye(5, dtype=torch.float64).expand(3, 5, 5)
    torch.testing.assert_close(synthesize(identity, X), X)

    S = torch.rand(3, 5, 5, dtype=torch.float64)
    expected = torch.zeros(5, 3, dtype=torch.float64)
    for t in range(3):
        for m in range(5):
            for n in range(5):
                expected[m, t] += S[t, m, n] * X[n, t]
    torch.testing.assert_close(synthesize(S, X), expected)
    with pytest.raises(ShapeError):
        synthesize(S, torch.rand(4, 3))


@pytest.mark.parametrize("seed", range(10))
def test_synthesize_reproduces_propagation_scale(seed):
    config = small_sim_config(n_items=2, n_days=4, rng_seed=seed)
    trace = generate_trace(config)
    orders = generate_orders(trace, config)
    by_key = {(s.item, s.day): s for s in trace}
    for example in build_examples(trace, orders, window=2, horizon=2):
        for t, day in enumerate(example.target_days):
            ratio = oracle_activation_ratio(orders, by_key[example.item, day])
            local = {m: i for i, m in enumerate(ratio.promoters)}
            present = np.array([a for a, m in enumerate(example.members) if int(m) in local], dtype=np.int64)
            rows = np.array([local[int(example.members[a])] for a in present], dtype=np.int64)
            S = np.zeros((example.num_members, example.num_members))
            S[np.ix_(present, present)] = ratio.values[np.ix_(rows, rows)]
            S = S * example.S_true[t]
            X = torch.as_tensor(example.x_true[:, t : t + 1], dtype=torch.float64)
            y_hat = synthesize(torch.as_tensor(S)[None], X)[:, 0]
            y = torch.as_tensor(example.y[:, t], dtype=torch.float64)
            torch.testing.assert_close(y_hat, y, rtol=1e-5, atol=1e-3)


def test_ablation_variants_drop_modules():
    config = tiny_model_config()
    no_gcn = DNTSModel(config, 10, 3, window=3, horizon=1, use_gcn=False)
    names = [name for name, _ in no_gcn.named_parameters()]
    assert not any(n.startswith(("local_encoder", "global_encoder", "item_embedding")) for n in names)
    assert no_gcn.feature_dim == config.d_m

    s2s = DNTSModel(config, 10, 3, window=3, horizon=1, mode="s2s")
    assert s2s.decoder is None
    assert not any(n.startswith("decoder") for n, _ in s2s.named_parameters())
    assert s2s.input_signal == "self_sales"
    assert DNTSModel(config, 10, 3, window=3, horizon=1, mode="p2p").input_signal == "propagation"

    with pytest.raises(UnknownModeError):
        DNTSModel(config, 10, 3, window=3, horizon=1, mode="x2y")


@pytest.mark.parametrize("mode", ["s2p", "s2s", "p2p"])
@pytest.mark.parametrize("use_gcn", [True, False])
def test_forward_on_dataset(micro_dataset, mode, use_gcn):
    model = DNTSModel(
        tiny_model_config(), micro_dataset.num_promoters, micro_dataset.num_items, 3, 1, mode=mode, use_gcn=use_gcn
    )
    example = micro_dataset.examples["train"][0]
    inputs = make_example_input(example, micro_dataset, 3, np.random.default_rng(0), signal=model.input_signal)
    hypergraph = micro_dataset.hypergraph(example.input_days)
    loss, terms, output = model.forward_train(inputs, hypergraph)
    M = example.num_members
    assert output.y_hat.shape == (M, 1)
    assert bool((output.y_hat >= 0).all())
    assert torch.isfinite(loss)
    assert set(terms) == ({"main", "aux"} if mode == "s2p" else {"main"})
    if mode == "s2p":
        assert output.S_hat.shape == (1, M, M)
        inactive = output.l_hat[:, 0] < model.cfg.delta
        assert output.S_hat[0][inactive].abs().sum().item() == 0.0
    loss.backward()


def test_shared_global_representation(micro_dataset):
    model = DNTSModel(tiny_model_config(), micro_dataset.num_promoters, micro_dataset.num_items, 3, 1)
    model.eval()
    example = micro_dataset.examples["train"][0]
    inputs = make_example_input(example, micro_dataset, 3, np.random.default_rng(0))
    hypergraph = micro_dataset.hypergraph(example.input_days)
    with torch.no_grad():
        direct = model(inputs, hypergraph).y_hat
        cached = model(inputs, global_repr=model.global_encode(hypergraph)).y_hat
    torch.testing.assert_close(direct, cached)


def test_build_model_validates(micro_dataset):
    config = Config(data=DataConfig(window=3, horizon=1), model=tiny_model_config())
    model = build_model(config, micro_dataset.num_promoters, micro_dataset.num_items)
    assert model.mode == "s2p" and model.use_gcn
    with pytest.raises(ConfigError):
        build_model(Config(data=DataConfig(window=2), model=ModelConfig()), 10, 2)
