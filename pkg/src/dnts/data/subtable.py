from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass

from dnts.errors import DataError
from dnts.typing import ItemId, PromoterId, PromotionSnapshot


@dataclass(frozen=True, slots=True)
class SubTable:
    """Item-specific promoter set with dense local ids; the coordinate system of every per-item tensor."""

    item: ItemId
    members: tuple[PromoterId, ...]
    local_index: dict[PromoterId, int]

    @classmethod
    def create(cls, item: ItemId, members: Iterable[PromoterId]) -> SubTable:
        ordered = tuple(sorted(set(members)))
        return cls(item, ordered, {m: i for i, m in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, promoter: PromoterId) -> bool:
        return promoter in self.local_index


def build_subtable(
    trace: Iterable[PromotionSnapshot],
    item: ItemId,
    window: tuple[int, int] | None = None,
    max_members: int | None = None,
) -> SubTable:
    """Union of the promoters of `item` over the days in `window` = [start, stop).

    With `max_members`, only the most frequently active promoters are kept (ties broken by id).
    """
    snapshots = [s for s in trace if s.item == item]
    if len(snapshots) == 0:
        raise DataError(f"item {item} is absent from the trace")
    if window is not None:
        start, stop = window
        days = {s.day for s in snapshots}
        if start < 0 or stop <= start or start < min(days) or stop - 1 > max(days):
            raise DataError(f"window {window} is outside the trace range [{min(days)}, {max(days) + 1})")
        snapshots = [s for s in snapshots if start <= s.day < stop]

    counts: Counter[PromoterId] = Counter()
    for snapshot in snapshots:
        counts.update(snapshot.promoters)
    members = list(counts)
    if max_members is not None and len(members) > max_members:
        members = sorted(members, key=lambda m: (-counts[m], m))[:max_members]
    return SubTable.create(item, members)
