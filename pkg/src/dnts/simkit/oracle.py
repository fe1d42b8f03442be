"""Exact ground-truth quantities computed from order attribution chains."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dnts.errors import OracleMismatchError
from dnts.typing import ItemId, OrderRecord, PromoterId, PromotionSnapshot

from .graph import descendant_sets


@dataclass(frozen=True, slots=True)
class PromoterMatrix:
    """Square matrix indexed by (root promoter, descendant promoter)."""

    promoters: tuple[PromoterId, ...]
    values: NDArray[np.float64]

    def get(self, root: PromoterId, descendant: PromoterId) -> float:
        index = {m: i for i, m in enumerate(self.promoters)}
        return float(self.values[index[root], index[descendant]])


@dataclass(frozen=True, slots=True)
class ConsistencyReport:
    ok: bool
    max_deviation: float
    violation: tuple[ItemId, int, PromoterId] | None = None


def _select(orders: Iterable[OrderRecord], item: ItemId, day: int) -> list[OrderRecord]:
    return [o for o in orders if o.item == item and o.day == day]


def _keys(orders: list[OrderRecord], promoters: Iterable[PromoterId] | None) -> list[PromoterId]:
    if promoters is not None:
        return sorted(promoters)
    return sorted({m for o in orders for m in o.chain})


def oracle_self_sales(
    orders: Iterable[OrderRecord],
    item: ItemId,
    day: int,
    promoters: Iterable[PromoterId] | None = None,
) -> dict[PromoterId, float]:
    """x(m): total sales of orders originated by m."""
    selected = _select(orders, item, day)
    result = dict.fromkeys(_keys(selected, promoters), 0.0)
    for o in selected:
        result[o.originator] = result.get(o.originator, 0.0) + o.sales
    return result


def oracle_propagation_scale(
    orders: Iterable[OrderRecord],
    item: ItemId,
    day: int,
    promoters: Iterable[PromoterId] | None = None,
) -> dict[PromoterId, float]:
    """y(m): total sales of orders whose chain contains m at a non-originator position."""
    selected = _select(orders, item, day)
    result = dict.fromkeys(_keys(selected, promoters), 0.0)
    for o in selected:
        for m in o.chain[1:]:
            result[m] = result.get(m, 0.0) + o.sales
    return result


def oracle_activation_ratio(orders: Iterable[OrderRecord], snapshot: PromotionSnapshot) -> PromoterMatrix:
    """s[m, d]: share of d's self-sales whose attribution chain passes through m."""
    promoters = snapshot.promoters
    index = {m: i for i, m in enumerate(promoters)}
    selected = _select(orders, snapshot.item, snapshot.day)
    n = len(promoters)
    attributed = np.zeros((n, n), dtype=np.float64)
    self_sales = np.zeros(n, dtype=np.float64)
    for o in selected:
        d = index[o.originator]
        self_sales[d] += o.sales
        for m in set(o.chain):
            attributed[index[m], d] += o.sales
    ratio = np.divide(attributed, self_sales[None, :], out=np.zeros_like(attributed), where=self_sales[None, :] > 0)
    return PromoterMatrix(promoters, np.clip(ratio, 0.0, 1.0))


def descendant_gate(snapshot: PromotionSnapshot) -> PromoterMatrix:
    """Binary matrix with entry (m, d) = 1 iff d is reachable from m."""
    promoters = snapshot.promoters
    index = {m: i for i, m in enumerate(promoters)}
    gate = np.zeros((len(promoters), len(promoters)), dtype=np.float64)
    for m, descendants in descendant_sets(snapshot).items():
        for d in descendants:
            gate[index[m], index[d]] = 1.0
    return PromoterMatrix(promoters, gate)


def oracle_consistency_check(
    trace: Iterable[PromotionSnapshot],
    orders: Iterable[OrderRecord],
    tolerance: float = 1e-9,
    raise_on_violation: bool = False,
) -> ConsistencyReport:
    """Checks y = (gate * s) @ x for every snapshot, the matrix form of the propagation scale."""
    grouped: dict[tuple[ItemId, int], list[OrderRecord]] = defaultdict(list)
    for o in orders:
        grouped[o.item, o.day].append(o)

    max_deviation = 0.0
    violation = None
    for snapshot in trace:
        day_orders = grouped.get((snapshot.item, snapshot.day), [])
        x = oracle_self_sales(day_orders, snapshot.item, snapshot.day, snapshot.promoters)
        y = oracle_propagation_scale(day_orders, snapshot.item, snapshot.day, snapshot.promoters)
        ratio = oracle_activation_ratio(day_orders, snapshot).values
        gate = descendant_gate(snapshot).values
        x_vec = np.array([x[m] for m in snapshot.promoters])
        y_vec = np.array([y[m] for m in snapshot.promoters])
        deviation = np.abs((gate * ratio) @ x_vec - y_vec)
        if deviation.size == 0:
            continue
        worst = int(np.argmax(deviation))
        if deviation[worst] > max_deviation:
            max_deviation = float(deviation[worst])
        if violation is None and deviation[worst] > tolerance:
            violation = (snapshot.item, snapshot.day, snapshot.promoters[worst])
            if raise_on_violation:
                raise OracleMismatchError(*violation, float(deviation[worst]))
    return ConsistencyReport(violation is None, max_deviation, violation)
