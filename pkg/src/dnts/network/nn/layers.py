from collections.abc import Sequence

import torch
from torch import Tensor, nn

from dnts.errors import ShapeError

from .ops import attention_aggregate, conv1d_bank


class InceptionConv(nn.Module):
    """Parallel 1D convolutions with kernel sizes K, concatenated on the channel axis."""

    def __init__(self, in_channels: int, out_channels: int, kernel_sizes: Sequence[int], causal: bool = True):
        super().__init__()
        if len(kernel_sizes) == 0:
            raise ValueError("kernel_sizes is empty")
        assert out_channels % len(kernel_sizes) == 0, "out_channels must be divisible by the number of kernels"
        self.kernel_sizes = tuple(kernel_sizes)
        self.causal = causal
        self.convs = nn.ModuleList(
            [nn.Conv1d(in_channels, out_channels // len(kernel_sizes), k) for k in self.kernel_sizes]
        )

    def initialize_weights(self):
        for conv in self.convs:
            nn.init.xavier_uniform_(conv.weight)
            nn.init.constant_(conv.bias, 0.0)

    def forward(self, x: Tensor) -> Tensor:
        return conv1d_bank(x, [c.weight for c in self.convs], [c.bias for c in self.convs], self.causal)


class AttentionAggregation(nn.Module):
    """Additive attention: score(q, v) = a^T tanh(W_q q + W_v v), softmax within each group."""

    def __init__(self, query_dim: int, value_dim: int, hidden_dim: int):
        super().__init__()
        self.query_proj = nn.Linear(query_dim, hidden_dim, bias=False)
        self.value_proj = nn.Linear(value_dim, hidden_dim)
        self.score = nn.Linear(hidden_dim, 1, bias=False)

    def initialize_weights(self):
        for m in (self.query_proj, self.value_proj, self.score):
            nn.init.xavier_uniform_(m.weight)
        nn.init.constant_(self.value_proj.bias, 0.0)

    def forward(self, query: Tensor, values: Tensor, index: Tensor) -> Tensor:
        """
        Args:
            query: FloatTensor [G, Fq]
            values: FloatTensor [P, Fv]
            index: LongTensor [P,] - group of each value

        Returns:
            FloatTensor [G, Fv]
        """
        scores = self.score(torch.tanh(self.query_proj(query)[index] + self.value_proj(values))).squeeze(-1)
        return attention_aggregate(scores, values, index, query.size(0))


class GRUSequence(nn.Module):
    """Runs a GRU over T steps and returns the final hidden state."""

    def __init__(self, input_dim: int, hidden_dim: int):
        super().__init__()
        self.hidden_dim = hidden_dim
        self.gru = nn.GRU(input_dim, hidden_dim)

    def forward(self, sequence: Tensor, h0: Tensor | None = None) -> Tensor:
        """
        Args:
            sequence: FloatTensor [T, N, F]
            h0: FloatTensor [N, H] | None

        Returns:
            FloatTensor [N, H]
        """
        if sequence.dim() != 3 or sequence.size(-1) != self.gru.input_size:
            raise ShapeError("gru_sequence", tuple(sequence.shape), (-1, -1, self.gru.input_size))
        _, h_n = self.gru(sequence, None if h0 is None else h0.unsqueeze(0))
        return h_n.squeeze(0)
