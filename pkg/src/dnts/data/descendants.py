from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dnts.simkit.graph import descendant_sets
from dnts.typing import PromotionSnapshot

from .subtable import SubTable


@dataclass(frozen=True, slots=True)
class DescendantIndex:
    """Descendant sets of consecutive days in sub-table coordinates.

    `pairs` rows are (day position, root, descendant), sorted lexicographically.
    """

    num_members: int
    days: tuple[int, ...]
    pairs: NDArray[np.int64]  # [P, 3]

    @classmethod
    def from_snapshots(
        cls,
        subtable: SubTable,
        days: Sequence[int],
        snapshots: Sequence[PromotionSnapshot | None],
    ) -> DescendantIndex:
        rows = []
        for t, snapshot in enumerate(snapshots):
            if snapshot is None:
                continue
            for m, descendants in descendant_sets(snapshot).items():
                if m not in subtable:
                    continue
                root = subtable.local_index[m]
                rows.extend((t, root, subtable.local_index[d]) for d in descendants if d in subtable)
        pairs = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
        return cls(len(subtable), tuple(days), pairs)

    def day_pairs(self, t: int) -> NDArray[np.int64]:
        """(root, descendant) rows of day position t."""
        return self.pairs[self.pairs[:, 0] == t, 1:]

    def of(self, t: int, root: int) -> NDArray[np.int64]:
        pairs = self.day_pairs(t)
        return pairs[pairs[:, 0] == root, 1]

    def grouped(self, t: int) -> dict[int, NDArray[np.int64]]:
        pairs = self.day_pairs(t)
        if len(pairs) == 0:
            return {}
        roots, starts = np.unique(pairs[:, 0], return_index=True)
        chunks = np.split(pairs[:, 1], starts[1:])
        return {int(root): chunk for root, chunk in zip(roots, chunks, strict=True)}

    def dense(self, t: int) -> NDArray[np.bool_]:
        matrix = np.zeros((self.num_members, self.num_members), dtype=np.bool_)
        pairs = self.day_pairs(t)
        matrix[pairs[:, 0], pairs[:, 1]] = True
        return matrix


def sample_descendants(
    descendants: NDArray[np.int64] | Sequence[int],
    k: int,
    rng: np.random.Generator | int | None = None,
) -> NDArray[np.int64]:
    """Uniform sample without replacement of min(k, |D|) descendants (sorted)."""
    assert k >= 1, f"sample size must be positive (k={k})"
    descendants = np.asarray(descendants, dtype=np.int64)
    if len(descendants) <= k:
        return descendants.copy()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return np.sort(rng.choice(descendants, size=k, replace=False))
