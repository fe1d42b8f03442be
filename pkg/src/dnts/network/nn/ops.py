"""Differentiable operators composed by the DNTS network.

All operators are plain torch functions; gradients come from autograd.
"""

from collections.abc import Sequence

import torch
import torch.nn.functional as F
from torch import Tensor
from torch_geometric.utils import scatter, softmax

from dnts.errors import ShapeError


def conv1d_bank(
    x: Tensor,
    weights: Sequence[Tensor],
    biases: Sequence[Tensor | None] | None = None,
    causal: bool = True,
) -> Tensor:
    """Multi-kernel 1D convolution with length-preserving padding.

    Args:
        x: FloatTensor [N, C_in, T]
        weights: List[FloatTensor [C_out_k, C_in, k]]
        biases: List[FloatTensor [C_out_k,] | None]
        causal: left zero padding of k-1 steps; otherwise centered padding

    Returns:
        FloatTensor [N, sum_k C_out_k, T]
    """
    if len(weights) == 0:
        raise ValueError("conv1d_bank requires at least one kernel")
    if biases is None:
        biases = [None] * len(weights)
    outputs = []
    for weight, bias in zip(weights, biases, strict=True):
        if weight.size(1) != x.size(1):
            raise ShapeError("conv1d_bank", tuple(x.shape), tuple(weight.shape))
        k = weight.size(-1)
        padding = (k - 1, 0) if causal else ((k - 1) // 2, k // 2)
        outputs.append(F.conv1d(F.pad(x, padding), weight, bias))
    return torch.cat(outputs, dim=1)


def logistic_noise(
    shape: Sequence[int],
    generator: torch.Generator | None = None,
    device: str | torch.device | None = None,
    dtype: torch.dtype | None = None,
    eps: float = 1e-10,
) -> Tensor:
    """Standard logistic draws L = log(u) - log(1-u)."""
    u = torch.rand(tuple(shape), generator=generator, device=device, dtype=dtype).clamp(eps, 1.0 - eps)
    return torch.log(u) - torch.log1p(-u)


def gumbel_binary(
    logits: Tensor,
    tau: float = 1.0,
    hard: bool = False,
    noise: Tensor | None = None,
    generator: torch.Generator | None = None,
) -> Tensor:
    """Binary concrete relaxation sigmoid((logits + L) / tau).

    With `hard`, the forward value is thresholded at 0.5 and the relaxed gradient is passed through.
    A fixed `noise` tensor makes the sample a deterministic function of `logits`.
    """
    if tau <= 0:
        raise ValueError(f"temperature must be positive (tau={tau})")
    if noise is None:
        noise = logistic_noise(logits.shape, generator, logits.device, logits.dtype)
    elif noise.shape != logits.shape:
        raise ShapeError("gumbel_binary", tuple(logits.shape), tuple(noise.shape))
    soft = torch.sigmoid((logits + noise) / tau)
    if not hard:
        return soft
    hard_sample = (soft > 0.5).to(soft.dtype)
    return (hard_sample - soft).detach() + soft


def attention_aggregate(scores: Tensor, values: Tensor, index: Tensor, num_groups: int) -> Tensor:
    """Softmax-weighted sum of `values` within each group.

    Args:
        scores: FloatTensor [P,]
        values: FloatTensor [P, F]
        index: LongTensor [P,] - group of each item
        num_groups: G

    Returns:
        FloatTensor [G, F] (zero rows for empty groups)
    """
    if scores.size(0) != values.size(0) or index.size(0) != values.size(0):
        raise ShapeError("attention_aggregate", tuple(scores.shape), tuple(values.shape))
    alpha = softmax(scores, index, num_nodes=num_groups)
    return scatter(alpha.unsqueeze(-1) * values, index, dim=0, dim_size=num_groups, reduce="sum")


def masked_sum(x: Tensor, mask: Tensor, dim: int) -> Tensor:
    if mask.shape != x.shape[: mask.dim()]:
        raise ShapeError("masked_sum", tuple(x.shape), tuple(mask.shape))
    mask = mask.to(x.dtype).reshape(mask.shape + (1,) * (x.dim() - mask.dim()))
    return (x * mask).sum(dim)


def masked_mean(x: Tensor, mask: Tensor, dim: int) -> Tensor:
    """Mean over entries where `mask` is set; zero where no entry is set."""
    total = masked_sum(x, mask, dim)
    count = mask.to(x.dtype).sum(dim).clamp(min=1.0)
    return total / count.reshape(count.shape + (1,) * (total.dim() - count.dim()))
