"""Synthetic promotion networks, daily snapshots and order logs.

Every random stream is derived from ``(rng_seed, item, stream, day)`` so that a
single item (or a single day of an item) can be regenerated independently and
items can be simulated in parallel without changing the result.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass
from functools import partial

import numpy as np
from numpy.typing import NDArray

from dnts.typing import ItemId, OrderRecord, PromoterId, PromotionSnapshot

from .config import SimConfig
from .graph import backward_path_counts, parent_lists

logger = logging.getLogger("dnts.simkit")

_STRUCTURE_STREAM = 0
_ACTIVITY_STREAM = 1
_ORDER_STREAM = 2

Chain = tuple[PromoterId, ...]


@dataclass(frozen=True, slots=True)
class ItemLatent:
    """Day-invariant description of one item's promoter audience."""

    audience: NDArray[np.int64]  # [U,] promoter ids, ascending
    rank: NDArray[np.int64]  # [U,] retweets only flow from lower to higher rank
    propensity: NDArray[np.float64]  # [U,] daily activity weight
    conversion: NDArray[np.float64]  # [U,] order-rate multiplier
    parent: NDArray[np.int64]  # [U,] latent retweet source (audience position), -1 for roots

    def position(self, promoter: PromoterId) -> int:
        pos = int(np.searchsorted(self.audience, promoter))
        assert self.audience[pos] == promoter, f"promoter {promoter} is not in the audience"
        return pos


def _rng(config: SimConfig, item: ItemId, stream: int, day: int = 0) -> np.random.Generator:
    return np.random.default_rng([config.rng_seed, item, stream, day])


def item_latent(config: SimConfig, item: ItemId) -> ItemLatent:
    rng = _rng(config, item, _STRUCTURE_STREAM)
    lo, hi = config.promoters_per_item_range
    size = int(rng.integers(lo, hi + 1))
    audience = np.sort(rng.choice(config.n_promoters, size=size, replace=False)).astype(np.int64)
    order = rng.permutation(size)
    rank = np.empty(size, dtype=np.int64)
    rank[order] = np.arange(size)
    propensity = rng.beta(2.0, 5.0, size=size)
    conversion = rng.lognormal(mean=-0.5, sigma=0.75, size=size)

    # NOTE: preferential attachment towards active promoters of lower rank
    parent = np.full(size, -1, dtype=np.int64)
    for k in range(1, size):
        if rng.random() >= config.retweet_probability:
            continue
        candidates = order[:k]
        weights = propensity[candidates] ** 2 + 1e-3
        parent[order[k]] = rng.choice(candidates, p=weights / weights.sum())
    return ItemLatent(audience, rank, propensity, conversion, parent)


def _snapshot_structure(config: SimConfig, latent: ItemLatent, item: ItemId, day: int) -> PromotionSnapshot:
    rng = _rng(config, item, _ACTIVITY_STREAM, day)
    size = len(latent.audience)
    n_active = max(1, int(rng.binomial(size, config.active_fraction)))
    if rng.random() < config.burst_probability:
        n_active = min(size, int(round(n_active * config.burst_multiplier)))
    weights = latent.propensity / latent.propensity.sum()
    active_pos = rng.choice(size, size=n_active, replace=False, p=weights)
    is_active = np.zeros(size, dtype=np.bool_)
    is_active[active_pos] = True

    # NOTE: Tree edges: attach to the nearest active latent ancestor
    edge_set: set[tuple[int, int]] = set()
    tree_edges: list[tuple[int, int]] = []
    for v in sorted(active_pos.tolist(), key=lambda p: latent.rank[p]):
        u = latent.parent[v]
        while u >= 0 and not is_active[u]:
            u = latent.parent[u]
        if u >= 0 and rng.random() < config.retweet_probability:
            tree_edges.append((int(u), int(v)))
    tree_edges = tree_edges[: config.edge_budget]
    edge_set.update(tree_edges)

    # NOTE: Cross links, always oriented by rank
    num_extra = min(int(config.extra_edge_ratio * n_active), config.edge_budget - len(edge_set))
    if n_active >= 2:
        for _ in range(max(num_extra, 0)):
            a, b = rng.choice(active_pos, size=2, replace=False)
            u, v = (a, b) if latent.rank[a] < latent.rank[b] else (b, a)
            edge_set.add((int(u), int(v)))

    promoters = tuple(sorted(int(latent.audience[p]) for p in active_pos))
    edges = tuple(sorted((int(latent.audience[u]), int(latent.audience[v])) for u, v in edge_set))
    return PromotionSnapshot(item=item, day=day, promoters=promoters, edges=edges)


def snapshot_orders(
    config: SimConfig,
    snapshot: PromotionSnapshot,
    latent: ItemLatent | None = None,
) -> list[tuple[float, Chain]]:
    """Orders of one snapshot as ``(sales, chain)`` pairs, in a fixed order.

    A chain walks back from the originator to a source node and is uniform over those backward paths.
    """
    rng = _rng(config, snapshot.item, _ORDER_STREAM, snapshot.day)
    parents = parent_lists(snapshot)
    path_counts = backward_path_counts(snapshot)

    orders: list[tuple[float, Chain]] = []
    for m in snapshot.promoters:
        conversion = 1.0 if latent is None else float(latent.conversion[latent.position(m)])
        num_orders = int(rng.poisson(config.order_rate * conversion))
        for _ in range(num_orders):
            sales = float(rng.geometric(1.0 / config.mean_sales))
            chain = [m]
            cur = m
            while cur in parents:
                # parents weighted by their own path counts
                candidates = parents[cur]
                weights = np.array([path_counts[p] for p in candidates], dtype=np.float64)
                cur = candidates[int(rng.choice(len(candidates), p=weights / weights.sum()))]
                chain.append(cur)
            orders.append((sales, tuple(chain)))
    return orders


def _simulate_item(config: SimConfig, item: ItemId) -> list[PromotionSnapshot]:
    latent = item_latent(config, item)
    snapshots = []
    for day in range(config.n_days):
        snapshot = _snapshot_structure(config, latent, item, day)
        self_sales = dict.fromkeys(snapshot.promoters, 0.0)
        for sales, chain in snapshot_orders(config, snapshot, latent):
            self_sales[chain[0]] += sales
        snapshots.append(
            PromotionSnapshot(snapshot.item, snapshot.day, snapshot.promoters, snapshot.edges, self_sales)
        )
    return snapshots


def generate_trace(config: SimConfig, num_workers: int = 1) -> list[PromotionSnapshot]:
    """One snapshot per (item, day), ordered by item then day."""
    config.validate()
    if config.n_days == 0:
        return []
    func = partial(_simulate_item, config)
    items = list(range(config.n_items))
    if num_workers > 1:
        with multiprocessing.Pool(num_workers) as pool:
            per_item = pool.map(func, items)
    else:
        per_item = [func(item) for item in items]
    trace = [snapshot for snapshots in per_item for snapshot in snapshots]
    logger.info(f"simulated {len(trace)} snapshots ({config.n_items} items x {config.n_days} days)")
    return trace


def generate_orders(trace: list[PromotionSnapshot], config: SimConfig) -> list[OrderRecord]:
    if len(trace) == 0:
        logger.warning("empty trace: no orders generated")
        return []
    latents: dict[ItemId, ItemLatent | None] = {}
    orders: list[OrderRecord] = []
    for snapshot in trace:
        if snapshot.item not in latents:
            latents[snapshot.item] = item_latent(config, snapshot.item) if 0 <= snapshot.item < config.n_items else None
        for sales, chain in snapshot_orders(config, snapshot, latents[snapshot.item]):
            orders.append(OrderRecord(len(orders), snapshot.item, snapshot.day, sales, chain))
    return orders


def toy_network() -> tuple[PromotionSnapshot, list[OrderRecord]]:
    """Toy network: m1 -> m2 -> m4, m1 -> m3 with orders (2, [m4, m2, m1]) and (4, [m3, m1])."""
    snapshot = PromotionSnapshot(
        item=0,
        day=0,
        promoters=(1, 2, 3, 4),
        edges=((1, 2), (1, 3), (2, 4)),
        self_sales={1: 0.0, 2: 0.0, 3: 4.0, 4: 2.0},
    )
    orders = [
        OrderRecord(order_id=0, item=0, day=0, sales=2.0, chain=(4, 2, 1)),
        OrderRecord(order_id=1, item=0, day=0, sales=4.0, chain=(3, 1)),
    ]
    return snapshot, orders
