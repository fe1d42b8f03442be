import torch
from torch import Tensor, nn

from dnts.errors import ShapeError

from .nn import gumbel_binary


class CoefficientDecoder(nn.Module):
    """Per horizon step: gate scores H W3 H^T, ratio scores H W4 H^T and the activation head FC.

    Entries on the diagonal of the coefficient matrix are fixed to zero (a promoter is never its own descendant).
    """

    def __init__(self, feature_dim: int, horizon: int, tau: float = 1.0, hard_gate: bool = True):
        super().__init__()
        self.horizon = horizon
        self.tau = tau
        self.hard_gate = hard_gate
        self.W3 = nn.Parameter(torch.empty(horizon, feature_dim, feature_dim))
        self.W4 = nn.Parameter(torch.empty(horizon, feature_dim, feature_dim))
        self.fc = nn.ModuleList([nn.Linear(feature_dim, 1) for _ in range(horizon)])

    def initialize_weights(self):
        nn.init.normal_(self.W3, std=0.01)
        nn.init.normal_(self.W4, std=0.01)
        for fc in self.fc:
            nn.init.normal_(fc.weight, std=0.01)
            nn.init.constant_(fc.bias, 0.0)

    def scores(self, H_hat: Tensor) -> tuple[Tensor, Tensor]:
        """[Δt, M, M] gate logits and ratio logits."""
        gate_logits = torch.einsum("mi,tij,nj->tmn", H_hat, self.W3, H_hat)
        ratio_logits = torch.einsum("mi,tij,nj->tmn", H_hat, self.W4, H_hat)
        return gate_logits, ratio_logits

    def forward(
        self,
        H_hat: Tensor,
        noise: Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> tuple[Tensor, Tensor, Tensor, Tensor, Tensor]:
        """
        Args:
            H_hat: FloatTensor [M, F]
            noise: FloatTensor [Δt, M, M] | None - frozen logistic noise (training only)

        Returns:
            gate_logits, S_gate, S_ratio, S_hat: FloatTensor [Δt, M, M]
            active_logits: FloatTensor [M, Δt]
        """
        gate_logits, ratio_logits = self.scores(H_hat)
        if self.training:
            S_gate = gumbel_binary(gate_logits, self.tau, self.hard_gate, noise, generator)
        else:
            S_gate = torch.sigmoid(gate_logits)
            if self.hard_gate:
                S_gate = (S_gate > 0.5).to(S_gate.dtype)
        S_ratio = torch.sigmoid(ratio_logits)
        M = H_hat.size(0)
        off_diagonal = 1.0 - torch.eye(M, dtype=H_hat.dtype, device=H_hat.device)
        S_hat = S_gate * S_ratio * off_diagonal
        active_logits = torch.cat([fc(H_hat) for fc in self.fc], dim=-1)
        return gate_logits, S_gate, S_ratio, S_hat, active_logits


def activation_filter(S_hat: Tensor, l_hat: Tensor, delta: float) -> Tensor:
    """Scale row m of S_hat by l_hat[m]; rows with l_hat < delta become exactly zero.

    Args:
        S_hat: FloatTensor [Δt, M, M]
        l_hat: FloatTensor [M, Δt]
    """
    if S_hat.shape[:2] != (l_hat.size(1), l_hat.size(0)):
        raise ShapeError("activation_filter", tuple(S_hat.shape), tuple(l_hat.shape))
    scale = l_hat.transpose(0, 1).unsqueeze(-1)  # [Δt, M, 1]
    return torch.where(scale >= delta, scale * S_hat, torch.zeros_like(S_hat))


def synthesize(S_filtered: Tensor, X_hat: Tensor) -> Tensor:
    """y_hat[:, t] = S[t] @ X_hat[:, t].

    Args:
        S_filtered: FloatTensor [Δt, M, M]
        X_hat: FloatTensor [M, Δt]

    Returns:
        FloatTensor [M, Δt]
    """
    if X_hat.dim() != 2 or S_filtered.shape != (X_hat.size(1), X_hat.size(0), X_hat.size(0)):
        raise ShapeError("synthesize", tuple(S_filtered.shape), tuple(X_hat.shape))
    return torch.einsum("tmn,nt->mt", S_filtered, X_hat)
