from dataclasses import dataclass, field
from typing import NamedTuple

from torch import Tensor
from typing_extensions import Self

PromoterId = int
ItemId = int


@dataclass(frozen=True, slots=True)
class PromotionSnapshot:
    """Retweet DAG of one item on one day together with per-promoter self-sales."""

    item: ItemId
    day: int
    promoters: tuple[PromoterId, ...]
    edges: tuple[tuple[PromoterId, PromoterId], ...]
    self_sales: dict[PromoterId, float] = field(default_factory=dict)

    def to_state(self) -> dict:
        return {
            "item": self.item,
            "day": self.day,
            "promoters": list(self.promoters),
            "edges": [[src, dst] for src, dst in self.edges],
            "self_sales": {str(m): v for m, v in sorted(self.self_sales.items())},
        }

    @classmethod
    def from_state(cls, state: dict) -> Self:
        return cls(
            item=int(state["item"]),
            day=int(state["day"]),
            promoters=tuple(int(m) for m in state["promoters"]),
            edges=tuple((int(src), int(dst)) for src, dst in state["edges"]),
            self_sales={int(m): float(v) for m, v in state["self_sales"].items()},
        )


@dataclass(frozen=True, slots=True)
class OrderRecord:
    """An order with its sales value and attribution chain (originator first)."""

    order_id: int
    item: ItemId
    day: int
    sales: float
    chain: tuple[PromoterId, ...]

    @property
    def originator(self) -> PromoterId:
        return self.chain[0]

    def to_state(self) -> dict:
        return {
            "order_id": self.order_id,
            "item": self.item,
            "day": self.day,
            "sales": self.sales,
            "chain": list(self.chain),
        }

    @classmethod
    def from_state(cls, state: dict) -> Self:
        return cls(
            order_id=int(state["order_id"]),
            item=int(state["item"]),
            day=int(state["day"]),
            sales=float(state["sales"]),
            chain=tuple(int(m) for m in state["chain"]),
        )


class Hypergraph(NamedTuple):
    """Promoter/item incidence pairs of consecutive days (B^t as index pairs)."""

    days: tuple[int, ...]
    promoter_rows: list[Tensor]  # [P_t,] per day
    item_rows: list[Tensor]  # [P_t,] per day
    num_promoters: int
    num_items: int


class ExampleInput(NamedTuple):
    item_row: int
    member_rows: Tensor  # [M,]
    signal: Tensor  # [M, T]  (self-sales, or propagation scale for P->P)
    message_pairs: Tensor  # [3, P] (day, root, descendant) in sub-table coordinates
    days: tuple[int, ...]
    y: Tensor  # [M, Δt]
    x: Tensor  # [M, Δt]
    active: Tensor  # [M, Δt]
    descendants: Tensor  # [Δt, M, M]


class ForwardOutput(NamedTuple):
    X_hat: Tensor | None  # [M, Δt] (None for P->P)
    H_hat: Tensor  # [M, F]
    gate_logits: Tensor | None  # [Δt, M, M]
    S_gate: Tensor | None  # [Δt, M, M]
    S_ratio: Tensor | None  # [Δt, M, M]
    S_hat: Tensor | None  # [Δt, M, M] after activation filtering
    active_logits: Tensor | None  # [M, Δt]
    l_hat: Tensor | None  # [M, Δt]
    y_hat: Tensor  # [M, Δt]
