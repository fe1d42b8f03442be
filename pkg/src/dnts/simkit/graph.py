import graphlib

import numpy as np
from numpy.typing import NDArray

from dnts.errors import CycleError
from dnts.typing import PromoterId, PromotionSnapshot
from dnts.utils import dfs_descendants


def edges_to_csr(
    num_nodes: int,
    src: NDArray[np.int64],
    dst: NDArray[np.int64],
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    order = np.lexsort((dst, src))
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr).astype(np.int64), dst[order].astype(np.int64)


def snapshot_csr(
    snapshot: PromotionSnapshot,
    index: dict[PromoterId, int] | None = None,
) -> tuple[int, NDArray[np.int64], NDArray[np.int64]]:
    """CSR adjacency of a snapshot in the coordinates of `index` (default: position in `promoters`)."""
    if index is None:
        index = {m: i for i, m in enumerate(snapshot.promoters)}
    src = np.array([index[u] for u, _ in snapshot.edges], dtype=np.int64)
    dst = np.array([index[v] for _, v in snapshot.edges], dtype=np.int64)
    indptr, indices = edges_to_csr(len(index), src, dst)
    return len(index), indptr, indices


def descendant_sets(snapshot: PromotionSnapshot) -> dict[PromoterId, tuple[PromoterId, ...]]:
    """D(m) for every promoter of the snapshot: nodes reachable by at least one edge."""
    promoters = snapshot.promoters
    num_nodes, indptr, indices = snapshot_csr(snapshot)
    cycle, out_indptr, out_indices = dfs_descendants(num_nodes, indptr, indices)
    if cycle >= 0:
        raise CycleError(snapshot.item, snapshot.day, promoters[cycle])
    return {
        m: tuple(promoters[d] for d in out_indices[out_indptr[i] : out_indptr[i + 1]]) for i, m in enumerate(promoters)
    }


def parent_lists(snapshot: PromotionSnapshot) -> dict[PromoterId, list[PromoterId]]:
    """Retweet sources of every promoter that has at least one."""
    parents: dict[PromoterId, list[PromoterId]] = {}
    for src, dst in snapshot.edges:
        parents.setdefault(dst, []).append(src)
    return parents


def backward_path_counts(snapshot: PromotionSnapshot) -> dict[PromoterId, int]:
    """Number of backward paths from each promoter to a source node; 1 for sources."""
    parents = parent_lists(snapshot)
    counts = dict.fromkeys(snapshot.promoters, 1)
    try:
        order = list(graphlib.TopologicalSorter(parents).static_order())
    except graphlib.CycleError as e:
        raise CycleError(snapshot.item, snapshot.day, e.args[1][0]) from e
    for m in order:
        if m in parents:
            counts[m] = sum(counts[p] for p in parents[m])
    return counts
