"""Central-difference verification of autograd gradients."""

from collections.abc import Callable, Iterable, Sequence

import torch
from torch import Tensor


def _relative_error(analytic: float, numeric: float, abs_floor: float) -> float:
    diff = abs(analytic - numeric)
    if diff < abs_floor:
        return 0.0
    return diff / max(abs(analytic), abs(numeric))


def _scalarize(out: Tensor, projection: list[Tensor]) -> Tensor:
    if out.numel() == 1:
        return out.reshape(())
    if len(projection) == 0:
        generator = torch.Generator().manual_seed(0)
        projection.append(torch.randn(out.shape, generator=generator, dtype=out.dtype))
    return (out * projection[0].to(out.device)).sum()


def grad_check(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    abs_floor: float = 1e-6,
) -> float:
    """Max relative error between autograd and central-difference gradients of `fn` w.r.t. `inputs`.

    Inputs are copied to float64. Non-scalar outputs are contracted with a fixed random projection.
    Differences below `abs_floor` count as agreement.
    """
    inputs = [x.detach().clone().to(torch.float64).requires_grad_(True) for x in inputs]
    projection: list[Tensor] = []
    out = _scalarize(fn(*inputs), projection)
    analytic = torch.autograd.grad(out, inputs, allow_unused=True)

    max_error = 0.0
    with torch.no_grad():
        for x, grad in zip(inputs, analytic, strict=True):
            grad = torch.zeros_like(x) if grad is None else grad
            flat, flat_grad = x.data.view(-1), grad.reshape(-1)
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + eps
                plus = _scalarize(fn(*inputs), projection).item()
                flat[i] = original - eps
                minus = _scalarize(fn(*inputs), projection).item()
                flat[i] = original
                numeric = (plus - minus) / (2 * eps)
                max_error = max(max_error, _relative_error(flat_grad[i].item(), numeric, abs_floor))
    return max_error


def grad_check_parameters(
    loss_fn: Callable[[], Tensor],
    parameters: Iterable[torch.nn.Parameter],
    eps: float = 1e-5,
    abs_floor: float = 1e-6,
    max_entries: int | None = None,
) -> float:
    """As `grad_check`, perturbing module parameters in place (the module must already be float64).

    With `max_entries`, only the first entries of each parameter are perturbed.
    """
    parameters = [p for p in parameters if p.requires_grad]
    assert all(p.dtype == torch.float64 for p in parameters), "gradient checks need float64 parameters"
    loss = loss_fn()
    analytic = torch.autograd.grad(loss, parameters, allow_unused=True)

    max_error = 0.0
    with torch.no_grad():
        for p, grad in zip(parameters, analytic, strict=True):
            grad = torch.zeros_like(p) if grad is None else grad
            flat, flat_grad = p.data.view(-1), grad.reshape(-1)
            num_entries = flat.numel() if max_entries is None else min(flat.numel(), max_entries)
            for i in range(num_entries):
                original = flat[i].item()
                flat[i] = original + eps
                plus = loss_fn().item()
                flat[i] = original - eps
                minus = loss_fn().item()
                flat[i] = original
                numeric = (plus - minus) / (2 * eps)
                max_error = max(max_error, _relative_error(flat_grad[i].item(), numeric, abs_floor))
    return max_error
