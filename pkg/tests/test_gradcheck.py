import numpy as np
import pytest
import torch
from conftest import tiny_model_config, toy_dataset

from dnts.data import make_example_input
from dnts.network import DNTSModel
from dnts.network.nn import logistic_noise
from dnts.utils import grad_check, grad_check_parameters


def jitter_parameters(model: torch.nn.Module, std: float = 0.1, seed: int = 0):
    """Moves zero-initialized biases off the relu kink so central differences are well defined."""
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in model.parameters():
            p.add_(std * torch.randn(p.shape, generator=generator, dtype=p.dtype))


@pytest.mark.parametrize(
    "mode, use_gcn, structure_target",
    [
        ("s2p", True, "gate"),
        ("s2p", True, "coefficient"),
        ("s2p", False, "gate"),
        ("p2p", True, "gate"),
    ],
)
def test_full_loss_gradients_with_frozen_noise(mode, use_gcn, structure_target):
    dataset = toy_dataset()
    config = tiny_model_config(hard_gate=False, delta=0.05, structure_target=structure_target)
    model = DNTSModel(config, dataset.num_promoters, dataset.num_items, 3, 1, mode=mode, use_gcn=use_gcn).double()
    jitter_parameters(model)
    model.train()

    example = dataset.examples["train"][0]
    assert example.num_members == 4
    signal = "propagation" if mode == "p2p" else "self_sales"
    inputs = make_example_input(example, dataset, k=3, rng=np.random.default_rng(0), signal=signal, dtype=torch.float64)
    hypergraph = dataset.hypergraph(example.input_days)
    noise = logistic_noise((1, 4, 4), generator=torch.Generator().manual_seed(1), dtype=torch.float64)

    def loss_fn():
        return model.forward_train(inputs, hypergraph, noise=noise)[0]

    assert torch.isfinite(loss_fn())
    assert grad_check_parameters(loss_fn, model.parameters(), max_entries=8) < 1e-4


def test_frozen_noise_makes_forward_deterministic():
    dataset = toy_dataset()
    model = DNTSModel(tiny_model_config(hard_gate=False), dataset.num_promoters, dataset.num_items, 3, 1).double()
    example = dataset.examples["train"][0]
    inputs = make_example_input(example, dataset, 3, np.random.default_rng(0), dtype=torch.float64)
    hypergraph = dataset.hypergraph(example.input_days)
    noise = logistic_noise((1, 4, 4), dtype=torch.float64)
    first = model(inputs, hypergraph, noise=noise).y_hat
    second = model(inputs, hypergraph, noise=noise).y_hat
    torch.testing.assert_close(first, second, rtol=0, atol=0)


def test_grad_check_flags_wrong_gradient():
    class WrongSquare(torch.autograd.Function):
        @staticmethod
        def forward(ctx, x):
            ctx.save_for_backward(x)
            return x * x

        @staticmethod
        def backward(ctx, grad):
            (x,) = ctx.saved_tensors
            return grad * x

    assert grad_check(WrongSquare.apply, [torch.randn(4) + 2.0]) > 0.1


def test_temporal_gradients_away_from_relu_kink():
    dataset = toy_dataset()
    model = DNTSModel(tiny_model_config(), dataset.num_promoters, dataset.num_items, 3, 1).double()
    jitter_parameters(model.temporal, seed=3)
    example = dataset.examples["train"][0]
    signal = torch.as_tensor(example.X, dtype=torch.float64)
    assert grad_check_parameters(lambda: model.temporal(signal).sum(), model.temporal.parameters()) < 1e-4
