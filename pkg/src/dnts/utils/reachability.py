import numpy as np
from numpy.typing import NDArray


def find_cycle(num_nodes: int, indptr: NDArray[np.int64], indices: NDArray[np.int64]) -> int:
    """Three-colour iterative DFS. Returns a node on a directed cycle, or -1."""
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
                    return int(w)
                if color[w] == 0:
                    color[w] = 1
                    cursor[w] = indptr[w]
                    top += 1
                    stack[top] = w
            else:
                color[v] = 2
                top -= 1
    return -1


def dfs_descendants(
    num_nodes: int,
    indptr: NDArray[np.int64],
    indices: NDArray[np.int64],
) -> tuple[int, NDArray[np.int64], NDArray[np.int64]]:
    """Descendant sets of every node of a DAG given in CSR form.

    Returns:
        cycle: node on a cycle (-1 for a DAG; the sets are empty otherwise)
        out_indptr: [N+1,]
        out_indices: sorted descendants of node v in out_indices[out_indptr[v]:out_indptr[v+1]]
    """
    cycle = find_cycle(num_nodes, indptr, indices)
    out_indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    if cycle >= 0:
        return cycle, out_indptr, np.zeros(0, dtype=np.int64)

    mark = np.full(num_nodes, -1, dtype=np.int64)
    chunks: list[NDArray[np.int64]] = []
    for source in range(num_nodes):
        found: list[int] = []
        stack = [source]
        while stack:
            v = stack.pop()
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if mark[w] != source:
                    mark[w] = source
                    found.append(int(w))
                    stack.append(int(w))
        chunks.append(np.sort(np.asarray(found, dtype=np.int64)))
        out_indptr[source + 1] = out_indptr[source] + len(found)
    out_indices = np.concatenate(chunks) if num_nodes > 0 else np.zeros(0, dtype=np.int64)
    return cycle, out_indptr, out_indices.astype(np.int64)
