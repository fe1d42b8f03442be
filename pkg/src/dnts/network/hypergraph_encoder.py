import torch
from torch import Tensor, nn
from torch_geometric.utils import scatter

from dnts.typing import Hypergraph

from .nn import AttentionAggregation, GRUSequence


class HypergraphEncoder(nn.Module):
    """Global promoter representation from the daily promoter/item hypergraphs, shared by every item."""

    def __init__(self, d_m: int, d_r: int, hidden_dim: int, attention_dim: int):
        super().__init__()
        self.d_m = d_m
        self.attention = AttentionAggregation(d_r, d_m, attention_dim)
        self.item_proj = nn.Linear(d_r, d_r, bias=False)  # W1
        self.promoter_proj = nn.Linear(d_m + d_r, d_m)  # W2
        self.gru = GRUSequence(d_m, hidden_dim)

    def initialize_weights(self):
        self.attention.initialize_weights()
        nn.init.xavier_uniform_(self.item_proj.weight)
        nn.init.xavier_uniform_(self.promoter_proj.weight)
        nn.init.constant_(self.promoter_proj.bias, 0.0)

    def hyperedge_aggregate(self, h: Tensor, r: Tensor, promoter_rows: Tensor, item_rows: Tensor) -> Tensor:
        """r'_i = Concat(sigmoid(sum_m alpha_mi h_m), W1 r_i); the attention half is zero for an empty hyperedge.

        Returns:
            FloatTensor [I, d_m + d_r]
        """
        num_items = r.size(0)
        pooled = self.attention(r, h[promoter_rows], item_rows)
        size = scatter(torch.ones_like(item_rows, dtype=h.dtype), item_rows, dim=0, dim_size=num_items, reduce="sum")
        pooled = torch.where(size.unsqueeze(-1) > 0, torch.sigmoid(pooled), torch.zeros_like(pooled))
        return torch.cat([pooled, self.item_proj(r)], dim=-1)

    def promoter_aggregate(
        self, r_prime: Tensor, promoter_rows: Tensor, item_rows: Tensor, num_promoters: int
    ) -> Tensor:
        """h'_m = Relu(sum over hyperedges of m of W2 r'_i); zero for a promoter in no hyperedge."""
        messages = self.promoter_proj(r_prime)[item_rows]
        return torch.relu(scatter(messages, promoter_rows, dim=0, dim_size=num_promoters, reduce="sum"))

    def forward(self, H0: Tensor, R0: Tensor, hypergraph: Hypergraph) -> Tensor:
        """
        Args:
            H0: FloatTensor [N, d_m]
            R0: FloatTensor [I, d_r]

        Returns:
            FloatTensor [N, hidden]
        """
        per_day = []
        for promoter_rows, item_rows in zip(hypergraph.promoter_rows, hypergraph.item_rows, strict=True):
            r_prime = self.hyperedge_aggregate(H0, R0, promoter_rows, item_rows)
            per_day.append(self.promoter_aggregate(r_prime, promoter_rows, item_rows, H0.size(0)))
        return self.gru(torch.stack(per_day))
