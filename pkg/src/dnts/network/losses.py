import torch
import torch.nn.functional as F
from torch import Tensor

from dnts.errors import ShapeError
from dnts.typing import ExampleInput, ForwardOutput


def msle(target: Tensor, prediction: Tensor) -> Tensor:
    """mean((log1p(target) - log1p(prediction))^2); both inputs must be non-negative."""
    if target.shape != prediction.shape:
        raise ShapeError("msle", tuple(target.shape), tuple(prediction.shape))
    if bool((target < 0).any()) or bool((prediction < 0).any()):
        raise ValueError("msle is undefined for negative inputs")
    return (torch.log1p(target) - torch.log1p(prediction)).pow(2).mean()


def focal_loss(
    input: Tensor,
    target: Tensor,
    alpha: float = 0.25,
    gamma: float = 2.0,
    logits: bool = True,
    mask: Tensor | None = None,
    eps: float = 1e-7,
) -> Tensor:
    """Binary focal loss, -alpha (1-p)^gamma log p for positives and -alpha p^gamma log(1-p) for negatives.

    `input` holds logits (default) or probabilities; `mask` restricts the mean to selected entries.
    """
    if input.shape != target.shape:
        raise ShapeError("focal_loss", tuple(input.shape), tuple(target.shape))
    if logits:
        p = torch.sigmoid(input)
        log_p, log_not_p = F.logsigmoid(input), F.logsigmoid(-input)
    else:
        p = input.clamp(eps, 1.0 - eps)
        log_p, log_not_p = torch.log(p), torch.log1p(-p)
    loss = -alpha * (target * (1.0 - p).pow(gamma) * log_p + (1.0 - target) * p.pow(gamma) * log_not_p)
    if mask is None:
        return loss.mean()
    mask = mask.to(loss.dtype)
    return (loss * mask).sum() / mask.sum().clamp(min=1.0)


def loss_main(y: Tensor, y_hat: Tensor) -> Tensor:
    return msle(y, y_hat)


def loss_aux(
    example: ExampleInput,
    output: ForwardOutput,
    alpha: float = 0.25,
    gamma: float = 2.0,
    structure_target: str = "gate",
) -> Tensor:
    """Self-sales MSLE + activation focal loss + structural focal loss, summed over horizon steps."""
    M, horizon = example.y.shape
    off_diagonal = 1.0 - torch.eye(M, dtype=example.y.dtype, device=example.y.device)
    total = example.y.new_zeros(())
    for t in range(horizon):
        total = total + msle(example.x[:, t], output.X_hat[:, t])
        total = total + focal_loss(output.active_logits[:, t], example.active[:, t], alpha, gamma)
        if structure_target == "gate":
            structure = focal_loss(output.gate_logits[t], example.descendants[t], alpha, gamma, mask=off_diagonal)
        else:
            coefficients = output.S_gate[t] * output.S_ratio[t]
            structure = focal_loss(coefficients, example.descendants[t], alpha, gamma, logits=False, mask=off_diagonal)
        total = total + structure
    return total


def loss_total(
    example: ExampleInput,
    output: ForwardOutput,
    alpha: float = 0.25,
    gamma: float = 2.0,
    structure_target: str = "gate",
) -> tuple[Tensor, dict[str, Tensor]]:
    """L_main + L_aux for the two-stage model; L_main alone when the model has no decoder."""
    main = loss_main(example.y, output.y_hat)
    if output.S_hat is None:
        return main, {"main": main}
    aux = loss_aux(example, output, alpha, gamma, structure_target)
    return main + aux, {"main": main, "aux": aux}
