import numba as nb
import numpy as np
from numpy.typing import NDArray


@nb.njit("int64(int64, int64[::1], int64[::1])", cache=True)
def _find_cycle(num_nodes, indptr, indices):
    color = np.zeros(num_nodes, dtype=np.int8)
    cursor = np.zeros(num_nodes, dtype=np.int64)
    stack = np.empty(num_nodes, dtype=np.int64)
    for source in range(num_nodes):
        if color[source] != 0:
            continue
        top = 0
        stack[0] = source
        color[source] = 1
        cursor[source] = indptr[source]
        while top >= 0:
            v = stack[top]
            if cursor[v] < indptr[v + 1]:
                w = indices[cursor[v]]
                cursor[v] += 1
                if color[w] == 1:
                    return w
                if color[w] == 0:
                    color[w] = 1
                    cursor[w] = indptr[w]
                    top += 1
                    stack[top] = w
            else:
                color[v] = 2
                top -= 1
    return -1


@nb.njit("void(int64, int64[::1], int64[::1], int64[::1], int64[::1])", cache=True)
def _fill_descendants(num_nodes, indptr, indices, out_indptr, out_indices):
    """Two passes share this kernel: with an empty `out_indices` only the counts are written."""
    mark = np.full(num_nodes, -1, dtype=np.int64)
    stack = np.empty(num_nodes + 1, dtype=np.int64)
    count_only = out_indices.shape[0] == 0
    for source in range(num_nodes):
        offset = out_indptr[source]
        n = 0
        stack[0] = source
        top = 1
        while top > 0:
            top -= 1
            v = stack[top]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if mark[w] != source:
                    mark[w] = source
                    if not count_only:
                        out_indices[offset + n] = w
                    n += 1
                    stack[top] = w
                    top += 1
        if count_only:
            out_indptr[source + 1] = out_indptr[source] + n
        else:
            out_indices[offset : offset + n] = np.sort(out_indices[offset : offset + n])


def find_cycle(num_nodes: int, indptr: NDArray[np.int64], indices: NDArray[np.int64]) -> int:
    return int(_find_cycle(num_nodes, np.ascontiguousarray(indptr, np.int64), np.ascontiguousarray(indices, np.int64)))


def dfs_descendants(
    num_nodes: int,
    indptr: NDArray[np.int64],
    indices: NDArray[np.int64],
) -> tuple[int, NDArray[np.int64], NDArray[np.int64]]:
    indptr = np.ascontiguousarray(indptr, np.int64)
    indices = np.ascontiguousarray(indices, np.int64)
    out_indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    cycle = int(_find_cycle(num_nodes, indptr, indices))
    if cycle >= 0:
        return cycle, out_indptr, np.zeros(0, dtype=np.int64)
    _fill_descendants(num_nodes, indptr, indices, out_indptr, np.zeros(0, dtype=np.int64))
    out_indices = np.empty(out_indptr[-1], dtype=np.int64)
    if out_indices.shape[0] > 0:
        _fill_descendants(num_nodes, indptr, indices, out_indptr, out_indices)
    return cycle, out_indptr, out_indices
