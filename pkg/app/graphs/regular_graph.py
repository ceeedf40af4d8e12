import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from app.errors import (
    DegreeMismatch,
    DimensionMismatch,
    DuplicateEdge,
    InvalidParams,
    OddTotalDegree,
    SelfLoop,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class RegularGraph:
    """Simple k-regular graph. Edges are stored as ascending (u, v) pairs with u < v."""

    n_vertices: int
    degree: int
    edges: Tuple[Edge, ...]
    adjacency: Tuple[Tuple[int, ...], ...] = field(repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def adjacency_matrix(self) -> sparse.csr_matrix:
        e = self.edge_array()
        n = self.n_vertices
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(rows.shape[0])
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def laplacian_matrix(self) -> sparse.csr_matrix:
        """Combinatorial Laplacian kI - A."""
        n = self.n_vertices
        return (self.degree * sparse.identity(n, format="csr") - self.adjacency_matrix()).tocsr()


def build_regular_graph(n: int, k: int, edges: Iterable[Sequence[int]]) -> RegularGraph:
    if n <= 0 or k <= 0:
        raise InvalidParams(f"n and k must be positive, got n={n}, k={k}")
    if (n * k) % 2 != 0:
        raise OddTotalDegree(f"n*k = {n * k} is odd; no {k}-regular graph on {n} vertices")

    seen = set()
    for pair in edges:
        if len(pair) != 2:
            raise InvalidParams(f"edge {pair!r} is not a pair")
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParams(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge {key} appears more than once")
        seen.add(key)

    neighbors: List[List[int]] = [[] for _ in range(n)]
    for u, v in seen:
        neighbors[u].append(v)
        neighbors[v].append(u)
    for vertex, nbrs in enumerate(neighbors):
        if len(nbrs) != k:
            raise DegreeMismatch(f"vertex {vertex} has degree {len(nbrs)}, expected {k}")

    return RegularGraph(
        n_vertices=n,
        degree=k,
        edges=tuple(sorted(seen)),
        adjacency=tuple(tuple(sorted(nbrs)) for nbrs in neighbors),
    )


def is_connected(g: RegularGraph) -> bool:
    n_components, _ = connected_components(g.adjacency_matrix(), directed=False)
    return n_components == 1


def quadratic_form(g: RegularGraph, x) -> float:
    """Sum over unoriented edges of (x(v) - x(w))^2."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n_vertices,):
        raise DimensionMismatch(f"expected a vector of length {g.n_vertices}, got shape {x.shape}")
    e = g.edge_array()
    diff = x[e[:, 0]] - x[e[:, 1]]
    return float(np.dot(diff, diff))
