from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from dnts.errors import DataError
from dnts.typing import ItemId


def split_items(
    item_ids: Sequence[ItemId],
    ratios: Sequence[float] = (0.6, 0.1, 0.3),
    seed: int = 0,
) -> tuple[list[ItemId], list[ItemId], list[ItemId]]:
    """Random (train, val, test) split along the item dimension."""
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise DataError(f"expected three non-negative ratios, got {tuple(ratios)}")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-6):
        raise DataError(f"split ratios must sum to 1, got {sum(ratios)}")
    item_ids = sorted(set(item_ids))
    n = len(item_ids)
    num_splits = sum(1 for r in ratios if r > 0)
    if n < num_splits:
        raise DataError(f"{n} items cannot fill {num_splits} splits")

    # every non-empty split receives at least one item
    train_min, val_min, test_min = (1 if r > 0 else 0 for r in ratios)
    n_val = min(max(round(ratios[1] * n), val_min), n - train_min - test_min)
    if ratios[2] > 0:
        n_train = min(max(round(ratios[0] * n), train_min), n - n_val - test_min)
    else:
        n_train = n - n_val

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [item_ids[i] for i in order]
    train = sorted(shuffled[:n_train])
    val = sorted(shuffled[n_train : n_train + n_val])
    test = sorted(shuffled[n_train + n_val :])
    return train, val, test
