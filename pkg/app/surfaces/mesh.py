"""
Intrinsic triangle meshes.

A mesh carries connectivity and one length per edge, nothing else: no vertex
coordinates. Boundary loops are ordered along the boundary half-edges, so the
surface lies to the left of each loop.
"""

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from app.errors import InvalidParams, MeshInvariantViolated, NonIntegerGenus, NonIntegerResult, UnknownLoop

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryLoop:
    label: str
    vertices: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def segments(self) -> np.ndarray:
        v = np.asarray(self.vertices, dtype=np.int64)
        return np.column_stack([v, np.roll(v, -1)])


@dataclass(frozen=True, eq=False)
class IntrinsicMesh:
    n_vertices: int
    triangles: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    boundary_loops: Tuple[BoundaryLoop, ...]

    @classmethod
    def from_arrays(cls, n_vertices: int, triangles, edges, lengths, boundary_loops) -> "IntrinsicMesh":
        triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        edges = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
        lengths = np.asarray(lengths, dtype=float).reshape(-1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return cls(
            n_vertices=int(n_vertices),
            triangles=triangles,
            edges=edges[order],
            lengths=lengths[order],
            boundary_loops=tuple(boundary_loops),
        )

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        return self.edges[:, 0] * self.n_vertices + self.edges[:, 1]

    def edge_indices(self, u, v) -> np.ndarray:
        """Positions of the undirected edges (u, v) in `edges`; raises if one is missing."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        keys = np.minimum(u, v) * self.n_vertices + np.maximum(u, v)
        idx = np.searchsorted(self._edge_keys, keys)
        idx = np.clip(idx, 0, max(self.n_edges - 1, 0))
        if self.n_edges == 0 or np.any(self._edge_keys[idx] != keys):
            raise MeshInvariantViolated("edge without a length")
        return idx

    def edge_length(self, u: int, v: int) -> float:
        return float(self.lengths[self.edge_indices(u, v)])

    @cached_property
    def triangle_lengths(self) -> np.ndarray:
        """(nT, 3) lengths; column i is the edge opposite corner i."""
        t = self.triangles
        return np.column_stack(
            [
                self.lengths[self.edge_indices(t[:, 1], t[:, 2])],
                self.lengths[self.edge_indices(t[:, 2], t[:, 0])],
                self.lengths[self.edge_indices(t[:, 0], t[:, 1])],
            ]
        )

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        # Kahan's form of Heron's formula, stable for needle triangles.
        s = np.sort(self.triangle_lengths, axis=1)[:, ::-1]
        a, b, c = s[:, 0], s[:, 1], s[:, 2]
        prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        return 0.25 * np.sqrt(np.maximum(prod, 0.0))

    @property
    def area(self) -> float:
        return float(self.triangle_areas.sum())

    @property
    def loop_labels(self) -> List[str]:
        return [loop.label for loop in self.boundary_loops]

    def loop(self, label: str) -> BoundaryLoop:
        for loop in self.boundary_loops:
            if loop.label == label:
                return loop
        raise UnknownLoop(f"no boundary loop labelled {label!r}")

    def loop_length(self, label: str) -> float:
        seg = self.loop(label).segments()
        return float(self.lengths[self.edge_indices(seg[:, 0], seg[:, 1])].sum())

    def boundary_vertices(self, labels: Optional[Sequence[str]] = None) -> np.ndarray:
        loops = self.boundary_loops if labels is None else [self.loop(l) for l in labels]
        if not loops:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([np.asarray(l.vertices, dtype=np.int64) for l in loops]))

    @property
    def total_boundary_length(self) -> float:
        return sum(self.loop_length(label) for label in self.loop_labels)

    @cached_property
    def mesh_id(self) -> str:
        digest = hashlib.sha1()
        digest.update(np.int64(self.n_vertices).tobytes())
        digest.update(np.ascontiguousarray(self.triangles).tobytes())
        digest.update(np.ascontiguousarray(self.edges).tobytes())
        digest.update(np.ascontiguousarray(self.lengths).tobytes())
        for loop in self.boundary_loops:
            digest.update(loop.label.encode())
            digest.update(np.asarray(loop.vertices, dtype=np.int64).tobytes())
        return digest.hexdigest()[:16]


def mesh_from_planar_triangles(
    n_vertices: int,
    triangles,
    corners,
    boundary_loops: Iterable[BoundaryLoop],
    tol: float = 1e-12,
) -> IntrinsicMesh:
    """
    Build a mesh from per-triangle planar corner positions (nT, 3, 2).

    Each triangle may be laid out in its own chart (an unrolled cylinder, say);
    the lengths of a shared edge must agree across its triangles.
    """
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    corners = np.asarray(corners, dtype=float).reshape(-1, 3, 2)
    u = triangles[:, [1, 2, 0]].reshape(-1)
    v = triangles[:, [2, 0, 1]].reshape(-1)
    ends = corners[:, [2, 0, 1], :] - corners[:, [1, 2, 0], :]
    lens = np.linalg.norm(ends, axis=2).reshape(-1)

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = lo * n_vertices + hi
    unique_keys, inverse = np.unique(keys, return_inverse=True)
    first = np.zeros(unique_keys.shape[0])
    first[inverse] = lens
    spread = np.abs(lens - first[inverse])
    if np.any(spread > tol * np.maximum(1.0, lens)):
        bad = int(np.argmax(spread))
        raise MeshInvariantViolated(f"edge ({lo[bad]}, {hi[bad]}) has inconsistent lengths across triangles")
    edges = np.column_stack([unique_keys // n_vertices, unique_keys % n_vertices])
    return IntrinsicMesh.from_arrays(n_vertices, triangles, edges, first, boundary_loops)


class Topology(NamedTuple):
    chi: int
    b: int
    genus: int


def euler_genus(m: IntrinsicMesh) -> Topology:
    t = m.triangles
    keys = np.concatenate(
        [
            np.minimum(t[:, a], t[:, b]) * m.n_vertices + np.maximum(t[:, a], t[:, b])
            for a, b in ((0, 1), (1, 2), (2, 0))
        ]
    )
    n_edges = int(np.unique(keys).shape[0])
    chi = m.n_vertices - n_edges + m.n_triangles
    b = len(m.boundary_loops)
    twice_genus = 2 - chi - b
    if twice_genus % 2 != 0 or twice_genus < 0:
        raise NonIntegerGenus(f"chi={chi}, b={b} give genus {twice_genus / 2}")
    return Topology(chi=chi, b=b, genus=twice_genus // 2)


def genus_formula(genus0: int, k: int, n: int) -> int:
    """Genus of the surface sewn from n copies of a genus0 piece along a k-regular graph."""
    if genus0 < 0 or k <= 0 or n <= 0:
        raise InvalidParams(f"need genus0 >= 0 and k, n > 0, got ({genus0}, {k}, {n})")
    if (k * n) % 2 != 0:
        raise NonIntegerResult(f"k*n = {k * n} is odd")
    return 1 + genus0 * n + (k * n) // 2 - n
