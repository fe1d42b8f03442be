import math

import pytest
import torch

from dnts.errors import ShapeError
from dnts.network.nn import (
    AttentionAggregation,
    GRUSequence,
    attention_aggregate,
    conv1d_bank,
    gru_cell,
    gumbel_binary,
    logistic_noise,
    masked_mean,
    masked_sum,
)
from dnts.utils import grad_check


def test_matmul_identity_and_sigmoid():
    A = torch.randn(3, 4, dtype=torch.float64)
    torch.testing.assert_close(torch.eye(3, dtype=torch.float64) @ A, A)
    x = torch.zeros(1, requires_grad=True)
    y = torch.sigmoid(x)
    y.backward()
    assert y.item() == 0.5
    assert x.grad.item() == 0.25


def test_conv1d_bank_hand_computed():
    x = torch.tensor([[[1.0, 2.0, 3.0]]])
    out = conv1d_bank(x, [torch.ones(1, 1, 2)], causal=True)
    assert out.flatten().tolist() == [1.0, 3.0, 5.0]


def test_conv1d_bank_identity_kernels():
    x = torch.randn(2, 1, 6)
    causal = torch.tensor([[[0.0, 0.0, 1.0]]])
    centered = torch.tensor([[[0.0, 1.0, 0.0]]])
    torch.testing.assert_close(conv1d_bank(x, [causal], causal=True), x)
    torch.testing.assert_close(conv1d_bank(x, [centered], causal=False), x)


def test_conv1d_bank_concatenates_channels():
    x = torch.randn(5, 2, 7)
    out = conv1d_bank(x, [torch.randn(3, 2, k) for k in (2, 3, 6, 7)])
    assert out.shape == (5, 12, 7)


def test_conv1d_bank_errors():
    with pytest.raises(ValueError):
        conv1d_bank(torch.randn(1, 1, 4), [])
    with pytest.raises(ShapeError):
        conv1d_bank(torch.randn(1, 2, 4), [torch.randn(1, 3, 2)])


def test_gru_zero_weights_halves_state():
    cell = gru_cell(3, 4)
    for p in cell.parameters():
        torch.nn.init.zeros_(p)
    h = torch.randn(2, 4)
    torch.testing.assert_close(cell(torch.randn(2, 3), h), 0.5 * h)


def test_gru_sequence_single_step_equals_cell():
    sequence = GRUSequence(3, 4)
    cell = gru_cell(3, 4)
    cell.weight_ih.data.copy_(sequence.gru.weight_ih_l0.data)
    cell.weight_hh.data.copy_(sequence.gru.weight_hh_l0.data)
    cell.bias_ih.data.copy_(sequence.gru.bias_ih_l0.data)
    cell.bias_hh.data.copy_(sequence.gru.bias_hh_l0.data)
    x = torch.randn(1, 5, 3)
    torch.testing.assert_close(sequence(x), cell(x[0]))
    with pytest.raises(ShapeError):
        sequence(torch.randn(5, 3))


def test_attention_single_and_identical_items():
    values = torch.randn(1, 4)
    out = attention_aggregate(torch.randn(1), values, torch.tensor([0]), 1)
    torch.testing.assert_close(out, values)

    common = torch.randn(1, 4).expand(3, 4)
    out = attention_aggregate(torch.randn(3), common, torch.zeros(3, dtype=torch.long), 1)
    torch.testing.assert_close(out, common[:1])


def test_attention_empty_group_is_zero():
    out = attention_aggregate(torch.randn(2), torch.randn(2, 3), torch.tensor([0, 0]), 3)
    assert out[1:].abs().sum().item() == 0.0


def test_attention_permutation_invariance():
    layer = AttentionAggregation(4, 4, 8).double()
    query = torch.randn(2, 4, dtype=torch.float64)
    values = torch.randn(7, 4, dtype=torch.float64)
    index = torch.tensor([0, 1, 0, 0, 1, 1, 0])
    perm = torch.randperm(7)
    out = layer(query, values, index)
    torch.testing.assert_close(layer(query, values[perm], index[perm]), out, atol=1e-12, rtol=0)


def test_attention_weights_sum_to_one():
    from torch_geometric.utils import softmax

    index = torch.tensor([0, 0, 1, 2, 2, 2])
    alpha = softmax(torch.randn(6, dtype=torch.float64), index, num_nodes=3)
    sums = torch.zeros(3, dtype=torch.float64).index_add_(0, index, alpha)
    torch.testing.assert_close(sums, torch.ones(3, dtype=torch.float64), atol=1e-12, rtol=0)


def test_gumbel_saturated_logits():
    logits = torch.full((100,), 1e4)
    assert gumbel_binary(logits, 1.0).min().item() == 1.0
    assert gumbel_binary(-logits, 1.0, hard=True).max().item() == 0.0


def test_gumbel_hard_frequency():
    generator = torch.Generator().manual_seed(0)
    logit = 0.7
    samples = gumbel_binary(torch.full((100_000,), logit), 1.0, hard=True, generator=generator)
    assert set(samples.unique().tolist()) <= {0.0, 1.0}
    assert abs(samples.mean().item() - 1.0 / (1.0 + math.exp(-logit))) < 0.01


def test_gumbel_straight_through_gradient():
    logits = torch.randn(6, requires_grad=True)
    noise = logistic_noise(logits.shape)
    gumbel_binary(logits, 0.5, hard=True, noise=noise).sum().backward()
    soft = torch.sigmoid((logits.detach() + noise) / 0.5)
    torch.testing.assert_close(logits.grad, soft * (1 - soft) / 0.5)


def test_gumbel_errors():
    with pytest.raises(ValueError):
        gumbel_binary(torch.zeros(2), tau=0.0)
    with pytest.raises(ShapeError):
        gumbel_binary(torch.zeros(2), noise=torch.zeros(3))


def test_masked_reductions():
    x = torch.tensor([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    mask = torch.tensor([True, False, True])
    assert masked_sum(x, mask, 0).tolist() == [6.0, 8.0]
    assert masked_mean(x, mask, 0).tolist() == [3.0, 4.0]
    assert masked_mean(x, torch.zeros(3, dtype=torch.bool), 0).tolist() == [0.0, 0.0]
    with pytest.raises(ShapeError):
        masked_sum(x, torch.ones(2, dtype=torch.bool), 0)


@pytest.mark.parametrize(
    "fn, shapes",
    [
        (lambda a, b: a @ b, [(3, 4), (4, 2)]),
        (lambda a, b: torch.cat([a, b], dim=1), [(3, 2), (3, 4)]),
        (lambda a, b: a * b - a + b, [(3, 4), (3, 4)]),
        (lambda a, b: a + b, [(3, 4), (4,)]),
        (lambda a: torch.tanh(a), [(5,)]),
        (lambda a: torch.sigmoid(torch.sigmoid(a)), [(5,)]),
        (lambda a: torch.relu(a + torch.sign(a) * 0.1), [(5,)]),
        (lambda a: torch.softmax(a, dim=-1), [(2, 5)]),
        (lambda a: a[1:, :2].transpose(0, 1), [(3, 4)]),
        (lambda a: masked_mean(a, torch.tensor([True, False, True]), 0), [(3, 4)]),
    ],
)
def test_core_op_gradients(fn, shapes):
    inputs = [torch.randn(*s, dtype=torch.float64) for s in shapes]
    assert grad_check(fn, inputs) < 1e-4


def test_linear_op_is_exact():
    assert grad_check(lambda a: 3.0 * a + 1.0, [torch.randn(4, dtype=torch.float64)]) < 1e-8


def test_sigmoid_chain_is_accurate():
    assert grad_check(lambda a: torch.sigmoid(2.0 * torch.sigmoid(a)), [torch.randn(6, dtype=torch.float64)]) < 1e-6


def test_composite_op_gradients():
    weights = [torch.randn(2, 1, k, dtype=torch.float64) for k in (2, 3)]
    assert grad_check(lambda x: conv1d_bank(x, weights), [torch.randn(2, 1, 5, dtype=torch.float64)]) < 1e-4

    index = torch.tensor([0, 0, 1, 1, 1])
    assert grad_check(lambda s, v: attention_aggregate(s, v, index, 2), [torch.randn(5), torch.randn(5, 3)]) < 1e-4

    noise = logistic_noise((4,), dtype=torch.float64)
    assert grad_check(lambda z: gumbel_binary(z, 0.7, noise=noise), [torch.randn(4)]) < 1e-4

    gru = GRUSequence(3, 4).double()
    assert grad_check(lambda x: gru(x), [torch.randn(5, 2, 3)]) < 1e-4
