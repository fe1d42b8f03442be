from collections.abc import Sequence

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from dnts.errors import ShapeError

from .nn import AttentionAggregation, InceptionConv


class TemporalConvolution(nn.Module):
    """Gated inception convolution over each promoter's daily signal.

    X^f = tanh(inception_f(x)), X^g = sigmoid(inception_g(x)), then a stack of 1x1 convolutions on
    Relu(X^f * X^g) and a linear map along time from T input days to Δt output days.
    Inputs are compressed with log1p; `forward` maps back with expm1(softplus(.)) so X_hat >= 0.
    """

    def __init__(
        self,
        window: int,
        horizon: int,
        kernel_sizes: Sequence[int] = (2, 3, 6, 7),
        channels: int = 16,
        num_layers: int = 2,
    ):
        super().__init__()
        if window < max(kernel_sizes):
            raise ShapeError("temporal_forward", (window,), (max(kernel_sizes),))
        self.window = window
        self.horizon = horizon
        self.filter_conv = InceptionConv(1, channels, kernel_sizes)
        self.gate_conv = InceptionConv(1, channels, kernel_sizes)
        stack = []
        for _ in range(num_layers):
            stack.append(nn.Conv1d(channels, channels, 1))
            stack.append(nn.ReLU())
        stack.append(nn.Conv1d(channels, 1, 1))
        self.stack = nn.Sequential(*stack)
        self.time_proj = nn.Linear(window, horizon)

    def initialize_weights(self):
        self.filter_conv.initialize_weights()
        self.gate_conv.initialize_weights()
        for m in self.stack:
            if isinstance(m, nn.Conv1d):
                nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")
                nn.init.constant_(m.bias, 0.0)

    def encode(self, X: Tensor) -> Tensor:
        """
        Args:
            X: FloatTensor [M, T] - non-negative daily signal

        Returns:
            FloatTensor [M, Δt] - pre-activation forecast in log1p space
        """
        if X.dim() != 2 or X.size(1) != self.window:
            raise ShapeError("temporal_forward", tuple(X.shape), (-1, self.window))
        return self.encode_log(torch.log1p(X))

    def encode_log(self, x: Tensor) -> Tensor:
        """As `encode`, on a signal that is already in log1p space."""
        h = x.unsqueeze(1)  # [M, 1, T]
        h = torch.relu(torch.tanh(self.filter_conv(h)) * torch.sigmoid(self.gate_conv(h)))
        h = self.stack(h).squeeze(1)  # [M, T]
        return self.time_proj(h)

    def forward(self, X: Tensor) -> Tensor:
        return torch.expm1(F.softplus(self.encode(X)))


class SignalGraphConv(nn.Module):
    """Convolution of the daily log signal over the static graph of an example.

    The static graph merges the descendant pairs of all input days. Each root adds an attention-weighted
    mix of its descendants' signals, scored against the root's representation H_hat.
    """

    def __init__(self, feature_dim: int, window: int, attention_dim: int):
        super().__init__()
        self.attention = AttentionAggregation(feature_dim, window, attention_dim)
        self.neighbor = nn.Linear(window, window)

    def initialize_weights(self):
        self.attention.initialize_weights()
        nn.init.xavier_uniform_(self.neighbor.weight)
        nn.init.constant_(self.neighbor.bias, 0.0)

    @staticmethod
    def static_pairs(message_pairs: Tensor) -> Tensor:
        """[2, P'] distinct (root, descendant) pairs over all day positions."""
        if message_pairs.size(1) == 0:
            return message_pairs.new_zeros((2, 0))
        return torch.unique(message_pairs[1:], dim=1)

    def forward(self, x: Tensor, H_hat: Tensor, message_pairs: Tensor) -> Tensor:
        """
        Args:
            x: FloatTensor [M, T] - log1p signal
            H_hat: FloatTensor [M, F]
            message_pairs: LongTensor [3, P] - (day position, root, descendant)

        Returns:
            FloatTensor [M, T]; rows without descendants are unchanged
        """
        root, desc = self.static_pairs(message_pairs)
        if root.numel() == 0:
            return x
        mixed = self.attention(H_hat, x[desc], root)
        has_descendants = torch.zeros(x.size(0), dtype=torch.bool, device=x.device)
        has_descendants[root] = True
        return x + torch.where(has_descendants.unsqueeze(-1), self.neighbor(mixed), torch.zeros_like(x))


class SignalHead(nn.Module):
    """Regression head of the single-stage modes: temporal forecast plus a linear read-out of H_hat.

    With `graph_conv`, the signal is convolved over the static graph before the temporal convolution.
    """

    def __init__(self, temporal: TemporalConvolution, feature_dim: int, graph_conv: SignalGraphConv | None = None):
        super().__init__()
        self.temporal = temporal
        self.graph_conv = graph_conv
        self.readout = nn.Linear(feature_dim, temporal.horizon)

    def initialize_weights(self):
        self.temporal.initialize_weights()
        if self.graph_conv is not None:
            self.graph_conv.initialize_weights()
        nn.init.normal_(self.readout.weight, std=0.01)
        nn.init.constant_(self.readout.bias, 0.0)

    def forward(self, X: Tensor, H_hat: Tensor, message_pairs: Tensor | None = None) -> Tensor:
        if self.graph_conv is None:
            return torch.expm1(F.softplus(self.temporal.encode(X) + self.readout(H_hat)))
        assert message_pairs is not None, "message pairs are required for the signal graph convolution"
        if X.dim() != 2 or X.size(1) != self.temporal.window:
            raise ShapeError("temporal_forward", tuple(X.shape), (-1, self.temporal.window))
        x = self.graph_conv(torch.log1p(X), H_hat, message_pairs)
        return torch.expm1(F.softplus(self.temporal.encode_log(x) + self.readout(H_hat)))
