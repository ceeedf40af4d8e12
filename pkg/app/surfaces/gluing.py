import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from app.errors import DegreeMismatch, NotConnected
from app.graphs import RegularGraph, is_connected
from .mesh import IntrinsicMesh
from .piece import FundamentalPiece
from .validation import assert_valid_mesh
from .weld import Seam, disjoint_union, weld

logger = logging.getLogger(__name__)


def sigma_label(v: int) -> str:
    return f"sigma{v}"


@dataclass(frozen=True)
class EdgeSlot:
    """Graph edge (v, w) sewn through loop b{i} of copy v and loop b{j} of copy w."""

    v: int
    w: int
    i: int
    j: int


@dataclass(frozen=True, eq=False)
class GluedSurface:
    mesh: IntrinsicMesh
    graph: RegularGraph
    piece: FundamentalPiece
    piece_vertex_maps: Tuple[np.ndarray, ...]
    sigma_loops: Tuple[str, ...]
    collar_maps: Tuple[np.ndarray, ...]
    edge_slots: Tuple[EdgeSlot, ...]
    offset: int = 0

    @property
    def n_pieces(self) -> int:
        return self.graph.n_vertices

    @property
    def triangle_owner(self) -> np.ndarray:
        """Graph vertex whose copy holds each triangle."""
        return np.arange(self.mesh.n_triangles) // self.piece.mesh.n_triangles

    def tube_grid(self, v: int, slot: int) -> np.ndarray:
        """Tube of copy v ending in loop b{slot}, in global vertex ids."""
        return self.piece_vertex_maps[v][self.piece.tube(slot)]


def slot_assignment(g: RegularGraph) -> List[EdgeSlot]:
    """B-slots follow ascending neighbour order at each vertex, numbered from 1."""
    slots = []
    for v, w in g.edges:
        i = g.adjacency[v].index(w) + 1
        j = g.adjacency[w].index(v) + 1
        slots.append(EdgeSlot(v, w, i, j))
    return slots


def glue_surface(piece: FundamentalPiece, g: RegularGraph, offset: int = 0) -> GluedSurface:
    """Sew one copy of the piece per graph vertex, following the edges of g."""
    if len(piece.b_loops) != g.degree:
        raise DegreeMismatch(f"piece has {len(piece.b_loops)} sewing loops but the graph is {g.degree}-regular")
    if not is_connected(g):
        raise NotConnected("cannot glue along a disconnected graph")

    union, offsets = disjoint_union([(str(v), piece.mesh) for v in range(g.n_vertices)])
    slots = slot_assignment(g)
    seams = [Seam(f"{s.v}/b{s.i}", f"{s.w}/b{s.j}", offset) for s in slots]
    rename: Dict[str, str] = {f"{v}/{piece.sigma0_loop}": sigma_label(v) for v in range(g.n_vertices)}
    mesh, labels = weld(union, seams, rename)
    assert_valid_mesh(mesh)

    n_piece = piece.mesh.n_vertices
    vertex_maps = tuple(labels[offsets[v] : offsets[v] + n_piece] for v in range(g.n_vertices))
    collars = tuple(vertex_maps[v][piece.collar_vertices] for v in range(g.n_vertices))

    expected = g.n_vertices * n_piece - g.n_edges * piece.n_b
    if mesh.n_vertices != expected:
        raise DegreeMismatch(f"glued surface has {mesh.n_vertices} vertices, expected {expected}")

    logger.info(
        f"Glued {g.n_vertices} pieces along {g.n_edges} edges: "
        f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles, {len(mesh.boundary_loops)} boundary loops"
    )
    return GluedSurface(
        mesh=mesh,
        graph=g,
        piece=piece,
        piece_vertex_maps=vertex_maps,
        sigma_loops=tuple(sigma_label(v) for v in range(g.n_vertices)),
        collar_maps=collars,
        edge_slots=tuple(slots),
        offset=offset,
    )


def double_piece(piece: FundamentalPiece, slot: int = 1) -> IntrinsicMesh:
    """Two copies of the piece sewn along one sewing loop, as around a single graph edge."""
    union, _ = disjoint_union([("v", piece.mesh), ("w", piece.mesh)])
    label = piece.b_loops[slot - 1]
    mesh, _ = weld(union, [Seam(f"v/{label}", f"w/{label}")])
    assert_valid_mesh(mesh)
    return mesh
