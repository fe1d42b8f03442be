import numpy as np
import pytest

from dnts.simkit.graph import descendant_sets, edges_to_csr
from dnts.typing import PromotionSnapshot
from dnts.utils import reachability


def kernels():
    yield reachability
    try:
        from dnts.utils import reachability_numba
    except Exception:
        return
    yield reachability_numba


def random_dag(rng: np.random.Generator, num_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(num_nodes)
    density = rng.uniform(0.0, 0.3)
    src, dst = [], []
    for i in range(num_nodes):
        for j in range(i + 1, num_nodes):
            if rng.random() < density:
                src.append(order[i])
                dst.append(order[j])
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def matrix_power_closure(num_nodes: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    adjacency = np.zeros((num_nodes, num_nodes), dtype=np.int64)
    adjacency[src, dst] = 1
    closure = adjacency.copy()
    power = adjacency.copy()
    for _ in range(num_nodes):
        power = np.minimum(power @ adjacency, 1)
        if not power.any():
            break
        closure = np.minimum(closure + power, 1)
    return closure.astype(bool)


@pytest.mark.parametrize("kernel", list(kernels()), ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_descendants_equal_transitive_closure(kernel):
    rng = np.random.default_rng(0)
    for _ in range(200):
        num_nodes = int(rng.integers(1, 51))
        src, dst = random_dag(rng, num_nodes)
        indptr, indices = edges_to_csr(num_nodes, src, dst)
        cycle, out_indptr, out_indices = kernel.dfs_descendants(num_nodes, indptr, indices)
        assert cycle == -1
        closure = matrix_power_closure(num_nodes, src, dst)
        for m in range(num_nodes):
            found = out_indices[out_indptr[m] : out_indptr[m + 1]]
            assert list(found) == sorted(found)
            assert set(found.tolist()) == set(np.flatnonzero(closure[m]).tolist())
            assert m not in set(found.tolist())


@pytest.mark.parametrize("kernel", list(kernels()), ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_cycle_detection(kernel):
    src = np.array([0, 1, 2, 3], dtype=np.int64)
    dst = np.array([1, 2, 3, 1], dtype=np.int64)
    indptr, indices = edges_to_csr(4, src, dst)
    assert kernel.find_cycle(4, indptr, indices) in (1, 2, 3)
    assert kernel.find_cycle(4, *edges_to_csr(4, src[:3], dst[:3])) == -1


def test_descendant_sets_leaf_and_isolated():
    snapshot = PromotionSnapshot(item=0, day=0, promoters=(5, 7, 9), edges=((5, 7),))
    assert descendant_sets(snapshot) == {5: (7,), 7: (), 9: ()}
