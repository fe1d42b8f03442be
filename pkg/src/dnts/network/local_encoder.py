import torch
from torch import Tensor, nn

from .nn import AttentionAggregation, GRUSequence


class LocalEncoder(nn.Module):
    """Item-specific promoter representation from the retweet DAGs of the input days.

    Per day, root m receives h_{d->m} = W2 Concat(h_d, W1 r) from each sampled descendant d, aggregated
    with attention and added to h_m. A GRU runs over the per-day representations.
    """

    def __init__(self, d_m: int, d_r: int, hidden_dim: int, attention_dim: int):
        super().__init__()
        self.d_m = d_m
        self.item_proj = nn.Linear(d_r, d_m, bias=False)  # W1
        self.message = nn.Linear(2 * d_m, d_m)  # W2
        self.attention = AttentionAggregation(d_m, d_m, attention_dim)
        self.gru = GRUSequence(d_m, hidden_dim)

    def initialize_weights(self):
        nn.init.xavier_uniform_(self.item_proj.weight)
        nn.init.xavier_uniform_(self.message.weight)
        nn.init.constant_(self.message.bias, 0.0)
        self.attention.initialize_weights()

    def conv_step(self, h: Tensor, r: Tensor, roots: Tensor, descendants: Tensor) -> Tensor:
        """
        Args:
            h: FloatTensor [N, d_m] - base representations (N = T * M when days are stacked)
            r: FloatTensor [d_r,]
            roots: LongTensor [P,] - row of the receiving promoter
            descendants: LongTensor [P,] - row of the sampled descendant

        Returns:
            FloatTensor [N, d_m]
        """
        if roots.numel() == 0:
            return h
        item = self.item_proj(r).expand(descendants.size(0), -1)
        messages = self.message(torch.cat([h[descendants], item], dim=-1))
        return self.attention(h, messages, roots) + h

    def forward(self, h: Tensor, r: Tensor, message_pairs: Tensor, num_days: int) -> Tensor:
        """
        Args:
            h: FloatTensor [M, d_m] - base embeddings of the sub-table members
            r: FloatTensor [d_r,] - item embedding
            message_pairs: LongTensor [3, P] - (day position, root, descendant)
            num_days: T

        Returns:
            FloatTensor [M, hidden]
        """
        M = h.size(0)
        stacked = h.repeat(num_days, 1)  # [T * M, d_m]
        day, root, desc = message_pairs
        per_day = self.conv_step(stacked, r, day * M + root, day * M + desc)
        return self.gru(per_day.view(num_days, M, self.d_m))
