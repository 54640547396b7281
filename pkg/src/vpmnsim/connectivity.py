"""Threshold adjacency graph and connected-component queries.

Devices i and j are adjacent when their channel gain exceeds the threshold:
gain_db[i, j] > gamma_db (strict; the +inf diagonal is ignored). Component
queries are delegated to scipy's compressed-sparse graph routines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .channel import ChannelRealization


@dataclass(frozen=True)
class AdjacencyGraph:
    """Undirected simple graph on nodes 0..n-1.

    edges is an (E, 2) int array with rows (i, j), i < j, sorted
    lexicographically; no self-loops, no duplicates.
    """

    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] >= e[:, 1]):
                raise ValueError("edges must be canonical (i < j)")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def to_sparse(self) -> csr_matrix:
        """Symmetric boolean adjacency in CSR form."""
        e = self.edges
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(rows.shape[0], dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


def adjacency(ch: ChannelRealization, gamma_db: float) -> AdjacencyGraph:
    """Edge (i, j) present iff gain_db[i, j] > gamma_db."""
    g = ch.gain_db
    n = g.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    keep = g[iu, ju] > gamma_db
    edges = np.column_stack([iu[keep], ju[keep]])
    return AdjacencyGraph(n=n, edges=edges)


def component_labels(g: AdjacencyGraph) -> np.ndarray:
    """Per-node component id (0-based, arbitrary but consistent)."""
    if g.num_edges == 0:
        return np.arange(g.n, dtype=np.int64)
    _, labels = connected_components(g.to_sparse(), directed=False)
    return labels.astype(np.int64)


def component_labels_dense(adjacent: np.ndarray) -> np.ndarray:
    """Component ids straight from a dense boolean adjacency matrix."""
    _, labels = connected_components(csr_matrix(adjacent), directed=False)
    return labels.astype(np.int64)


def all_connected_dense(adjacent: np.ndarray) -> bool:
    """Breadth-first reachability from node 0 over a dense symmetric boolean
    adjacency matrix (diagonal ignored). Fast path for tight Monte Carlo
    loops that already hold a thresholded gain matrix."""
    n = adjacent.shape[0]
    if n <= 1:
        return True
    reached = np.zeros(n, dtype=bool)
    reached[0] = True
    frontier = reached.copy()
    while True:
        new = adjacent[frontier].any(axis=0) & ~reached
        if not new.any():
            break
        reached |= new
        frontier = new
    return bool(reached.all())


def all_connected(g: AdjacencyGraph) -> bool:
    """True iff every node lies in one single component."""
    if g.n <= 1:
        return True
    if g.num_edges == 0:
        return False
    adj = np.zeros((g.n, g.n), dtype=bool)
    adj[g.edges[:, 0], g.edges[:, 1]] = True
    return all_connected_dense(adj | adj.T)


def component_of(g: AdjacencyGraph, v: int) -> set[int]:
    """Nodes in the maximal connected set containing v."""
    if not 0 <= v < g.n:
        raise IndexError(f"node {v} out of range for graph of size {g.n}")
    labels = component_labels(g)
    return set(np.flatnonzero(labels == labels[v]).tolist())
