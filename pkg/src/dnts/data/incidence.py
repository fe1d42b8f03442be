from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dnts.typing import ItemId, PromoterId, PromotionSnapshot


@dataclass(frozen=True, slots=True)
class IncidenceMatrix:
    """B^t as (promoter row, item row) index pairs: B[m, i] = 1 iff m is active for item i on `day`."""

    day: int
    num_promoters: int
    num_items: int
    promoter_rows: NDArray[np.int64]
    item_rows: NDArray[np.int64]

    def dense(self) -> NDArray[np.float32]:
        matrix = np.zeros((self.num_promoters, self.num_items), dtype=np.float32)
        matrix[self.promoter_rows, self.item_rows] = 1.0
        return matrix

    def row_sums(self) -> NDArray[np.int64]:
        return np.bincount(self.promoter_rows, minlength=self.num_promoters)

    def hyperedge(self, item_row: int) -> NDArray[np.int64]:
        return np.sort(self.promoter_rows[self.item_rows == item_row])


def build_vocabulary(trace: Iterable[PromotionSnapshot]) -> tuple[tuple[PromoterId, ...], tuple[ItemId, ...]]:
    promoters: set[PromoterId] = set()
    items: set[ItemId] = set()
    for snapshot in trace:
        promoters.update(snapshot.promoters)
        items.add(snapshot.item)
    return tuple(sorted(promoters)), tuple(sorted(items))


def build_incidence(
    trace: Iterable[PromotionSnapshot],
    day: int,
    promoter_ids: tuple[PromoterId, ...] | None = None,
    item_ids: tuple[ItemId, ...] | None = None,
) -> IncidenceMatrix:
    trace = list(trace)
    if promoter_ids is None or item_ids is None:
        promoter_ids, item_ids = build_vocabulary(trace)
    promoter_row = {m: i for i, m in enumerate(promoter_ids)}
    item_row = {item: i for i, item in enumerate(item_ids)}
    rows, cols = [], []
    for snapshot in trace:
        if snapshot.day != day:
            continue
        col = item_row[snapshot.item]
        for m in snapshot.promoters:
            rows.append(promoter_row[m])
            cols.append(col)
    return IncidenceMatrix(
        day,
        len(promoter_ids),
        len(item_ids),
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
    )
