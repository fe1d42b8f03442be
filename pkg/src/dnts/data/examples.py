from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dnts.errors import DataError
from dnts.simkit.oracle import oracle_propagation_scale, oracle_self_sales
from dnts.typing import ItemId, OrderRecord, PromotionSnapshot

from .descendants import DescendantIndex
from .subtable import SubTable, build_subtable

logger = logging.getLogger("dnts")


@dataclass(slots=True)
class TrainingExample:
    """One (item, window) forecasting example in sub-table coordinates.

    Input days are `start_day .. start_day+window-1`, target days the following `horizon` days.
    """

    item: ItemId
    start_day: int
    window: int
    horizon: int
    members: NDArray[np.int64]  # [M,] promoter ids
    X: NDArray[np.float32]  # [M, T] self-sales, zero on inactive days
    Y_hist: NDArray[np.float32]  # [M, T] historical propagation scale
    input_active: NDArray[np.float32]  # [M, T]
    input_edges: NDArray[np.int64]  # [E, 3] (day position, src, dst)
    input_descendants: DescendantIndex
    y: NDArray[np.float32]  # [M, Δt]
    x_true: NDArray[np.float32]  # [M, Δt]
    l: NDArray[np.float32]  # [M, Δt]
    target_descendants: DescendantIndex

    @property
    def num_members(self) -> int:
        return len(self.members)

    @property
    def input_days(self) -> tuple[int, ...]:
        return tuple(range(self.start_day, self.start_day + self.window))

    @property
    def target_days(self) -> tuple[int, ...]:
        return tuple(range(self.start_day + self.window, self.start_day + self.window + self.horizon))

    @property
    def S_true(self) -> NDArray[np.bool_]:
        """[Δt, M, M] descendant indicator of each target day."""
        return np.stack([self.target_descendants.dense(t) for t in range(self.horizon)])


def _member_vector(subtable: SubTable, values: dict[int, float]) -> NDArray[np.float32]:
    vector = np.zeros(len(subtable), dtype=np.float32)
    for m, v in values.items():
        if m in subtable:
            vector[subtable.local_index[m]] = v
    return vector


def _active_vector(subtable: SubTable, snapshot: PromotionSnapshot | None) -> NDArray[np.float32]:
    vector = np.zeros(len(subtable), dtype=np.float32)
    if snapshot is not None:
        for m in snapshot.promoters:
            if m in subtable:
                vector[subtable.local_index[m]] = 1.0
    return vector


def _edge_rows(subtable: SubTable, snapshots: Sequence[PromotionSnapshot | None]) -> NDArray[np.int64]:
    rows = [
        (t, subtable.local_index[src], subtable.local_index[dst])
        for t, snapshot in enumerate(snapshots)
        if snapshot is not None
        for src, dst in snapshot.edges
        if src in subtable and dst in subtable
    ]
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def build_item_examples(
    subtable: SubTable,
    snapshots: dict[int, PromotionSnapshot],
    orders: dict[int, list[OrderRecord]],
    window: int,
    horizon: int,
    start_days: Iterable[int],
) -> list[TrainingExample]:
    """Examples of one item. `snapshots` and `orders` are keyed by day."""
    members = np.asarray(subtable.members, dtype=np.int64)
    item = subtable.item
    examples = []
    for start in start_days:
        input_days = list(range(start, start + window))
        target_days = list(range(start + window, start + window + horizon))
        input_snapshots = [snapshots.get(t) for t in input_days]
        target_snapshots = [snapshots.get(t) for t in target_days]

        X = np.stack([_member_vector(subtable, s.self_sales if s else {}) for s in input_snapshots], axis=1)
        input_active = np.stack([_active_vector(subtable, s) for s in input_snapshots], axis=1)
        # self_sales already holds zeros for inactive members, the mask makes it exact for capped tables
        X = X * input_active
        Y_hist = np.stack(
            [_member_vector(subtable, oracle_propagation_scale(orders.get(t, []), item, t)) for t in input_days],
            axis=1,
        )
        y = np.stack(
            [_member_vector(subtable, oracle_propagation_scale(orders.get(t, []), item, t)) for t in target_days],
            axis=1,
        )
        x_true = np.stack(
            [_member_vector(subtable, oracle_self_sales(orders.get(t, []), item, t)) for t in target_days],
            axis=1,
        )
        l = np.stack([_active_vector(subtable, s) for s in target_snapshots], axis=1)  # noqa: E741

        examples.append(
            TrainingExample(
                item=item,
                start_day=start,
                window=window,
                horizon=horizon,
                members=members,
                X=X.astype(np.float32),
                Y_hist=Y_hist,
                input_active=input_active,
                input_edges=_edge_rows(subtable, input_snapshots),
                input_descendants=DescendantIndex.from_snapshots(subtable, input_days, input_snapshots),
                y=y,
                x_true=x_true,
                l=l,
                target_descendants=DescendantIndex.from_snapshots(subtable, target_days, target_snapshots),
            )
        )
    return examples


def build_examples(
    trace: Sequence[PromotionSnapshot],
    orders: Iterable[OrderRecord],
    window: int,
    horizon: int,
    max_members: int | None = None,
    stride: int = 1,
    items: Iterable[ItemId] | None = None,
) -> list[TrainingExample]:
    """One example per (item, window position); the sub-table of an item spans the whole trace."""
    if window < 1:
        raise DataError(f"input window must be positive (T={window})")
    if horizon < 1:
        raise DataError(f"horizon must be positive (Δt={horizon})")
    if len(trace) == 0:
        raise DataError("trace is empty")
    first_day = min(s.day for s in trace)
    num_days = max(s.day for s in trace) - first_day + 1
    if num_days < window + horizon:
        raise DataError(f"trace spans {num_days} days, fewer than T+Δt={window + horizon}")

    by_item: dict[ItemId, dict[int, PromotionSnapshot]] = defaultdict(dict)
    for snapshot in trace:
        by_item[snapshot.item][snapshot.day] = snapshot
    orders_by_item: dict[ItemId, dict[int, list[OrderRecord]]] = defaultdict(lambda: defaultdict(list))
    for order in orders:
        orders_by_item[order.item][order.day].append(order)

    item_ids = sorted(by_item) if items is None else list(items)
    start_days = range(first_day, first_day + num_days - window - horizon + 1, stride)
    examples: list[TrainingExample] = []
    skipped = 0
    for item in item_ids:
        subtable = build_subtable(by_item[item].values(), item, max_members=max_members)
        if len(subtable) == 0:
            skipped += 1
            continue
        examples.extend(
            build_item_examples(subtable, by_item[item], orders_by_item[item], window, horizon, start_days)
        )
    if skipped > 0:
        logger.info(f"skipped {skipped} items with an empty sub-table")
    return examples
