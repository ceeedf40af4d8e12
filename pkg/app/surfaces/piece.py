"""
The fundamental piece: a genus-0 surface with k+1 boundary loops of length 1.

Layout
------
The hub is the double of a flat regular 2(k+1)-gon of side 1/2: two copies
sewn along every odd side. Each even side then bounds a hole whose rim is the
side taken once on each copy, a loop of length exactly 1 with an even number
of vertices. A flat unit tube (circumference 1, length 1) with n_b columns is
welded onto every hole. When n_b is odd the hole has n_b + 1 vertices and one
flat taper band sits between hole and tube. The free end of tube 0 is Sigma_0
and the tube itself is the collar; the free ends of tubes 1..k are the sewing
loops b1..bk.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.config import settings
from app.errors import InvalidParams
from .mesh import BoundaryLoop, IntrinsicMesh, euler_genus
from .primitives import (
    CYLINDER_END,
    CYLINDER_START,
    build_flat_cylinder,
    build_flat_taper,
    build_regular_polygon,
    cylinder_grid,
)
from .validation import assert_valid_mesh, check_loop_lengths
from .weld import Seam, disjoint_union, extract_submesh, merge_vertices, weld

logger = logging.getLogger(__name__)

SIGMA0 = "sigma0"
HUB = "hub"


def b_label(slot: int) -> str:
    return f"b{slot}"


@dataclass(frozen=True, eq=False)
class FundamentalPiece:
    mesh: IntrinsicMesh
    k: int
    n_b: int
    resolution: int
    sigma0_loop: str
    b_loops: Tuple[str, ...]
    tubes: Tuple[np.ndarray, ...]
    genus0: int = 0

    @property
    def collar_vertices(self) -> np.ndarray:
        """(resolution + 1, n_b) grid of C_0; ring 0 is Sigma_0, the last ring meets the hub."""
        return self.tubes[0]

    def tube(self, slot: int) -> np.ndarray:
        """Grid of the tube ending in loop b{slot}; ring 0 is the free end."""
        return self.tubes[slot]


def build_hub(k: int, n_b: int) -> Tuple[IntrinsicMesh, Tuple[str, ...]]:
    """
    Doubled 2(k+1)-gon with k+1 holes of length 1; returns the mesh and its
    loop labels. Each hole has n_b vertices, rounded up to an even count.
    """
    sides = 2 * (k + 1)
    p = (n_b + 1) // 2
    polygon, layout = build_regular_polygon(sides, 0.5, p)
    nh = polygon.n_vertices

    doubled = IntrinsicMesh.from_arrays(
        2 * nh,
        np.concatenate([polygon.triangles, polygon.triangles[:, [0, 2, 1]] + nh]),
        np.concatenate([polygon.edges, polygon.edges + nh]),
        np.concatenate([polygon.lengths, polygon.lengths]),
        [],
    )

    seam = np.concatenate([layout.side(s) for s in range(1, sides, 2)])
    pairs = np.column_stack([seam, seam + nh])

    labels = []
    loops = []
    for s in range(0, sides, 2):
        side = layout.side(s)
        label = f"side{s // 2}"
        labels.append(label)
        loops.append(BoundaryLoop(label, tuple(int(v) for v in np.concatenate([side, side[-2:0:-1] + nh]))))

    hub, _ = merge_vertices(doubled, pairs, loops)
    return hub, tuple(labels)


def build_fundamental_piece(k: int, n_b: int = None, resolution: int = None) -> FundamentalPiece:
    n_b = settings.piece_n_b if n_b is None else n_b
    resolution = settings.piece_resolution if resolution is None else resolution
    if k < 2:
        raise InvalidParams(f"fundamental piece needs k >= 2, got {k}")
    if n_b < 8:
        raise InvalidParams(f"n_b must be at least 8, got {n_b}")
    if resolution < 1:
        raise InvalidParams(f"resolution must be positive, got {resolution}")

    hub, hub_loops = build_hub(k, n_b)
    hole = len(hub.loop(hub_loops[0]))
    tube = build_flat_cylinder(n_b, resolution, 1.0, 1.0)
    parts = [(HUB, hub)] + [(f"tube{j}", tube) for j in range(k + 1)]
    if hole == n_b:
        seams = [Seam(f"{HUB}/{hub_loops[j]}", f"tube{j}/{CYLINDER_END}") for j in range(k + 1)]
    else:
        taper = build_flat_taper(n_b, hole, 1.0)
        parts += [(f"taper{j}", taper) for j in range(k + 1)]
        seams = [Seam(f"taper{j}/{CYLINDER_START}", f"tube{j}/{CYLINDER_END}") for j in range(k + 1)]
        seams += [Seam(f"{HUB}/{hub_loops[j]}", f"taper{j}/{CYLINDER_END}") for j in range(k + 1)]
    union, offsets = disjoint_union(parts)

    rename = {f"tube0/{CYLINDER_START}": SIGMA0}
    rename.update({f"tube{j}/{CYLINDER_START}": b_label(j) for j in range(1, k + 1)})
    mesh, labels = weld(union, seams, rename)

    grid = cylinder_grid(n_b, resolution)
    tubes = tuple(labels[grid + offsets[j + 1]] for j in range(k + 1))

    assert_valid_mesh(mesh)
    check_loop_lengths(mesh, 1.0)
    topology = euler_genus(mesh)
    if topology.genus != 0 or topology.b != k + 1:
        raise InvalidParams(f"piece has topology {topology}, expected genus 0 with {k + 1} loops")

    logger.info(
        f"Built fundamental piece k={k}, n_b={n_b}, resolution={resolution}: "
        f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles, chi={topology.chi}"
    )
    return FundamentalPiece(
        mesh=mesh,
        k=k,
        n_b=n_b,
        resolution=resolution,
        sigma0_loop=SIGMA0,
        b_loops=tuple(b_label(j) for j in range(1, k + 1)),
        tubes=tubes,
    )


def collar_mesh(piece: FundamentalPiece) -> IntrinsicMesh:
    """
    The collar C_0 cut out of the piece: loop `sigma0` is its free end, loop
    `hub` the ring where it meets the rest of the piece.
    """
    grid = piece.collar_vertices
    inner = grid[-1]
    loops = [
        BoundaryLoop(SIGMA0, tuple(int(v) for v in grid[0])),
        BoundaryLoop(HUB, tuple(int(v) for v in np.roll(inner[::-1], 1))),
    ]
    sub, _ = extract_submesh(piece.mesh, grid.reshape(-1), loops)
    assert_valid_mesh(sub)
    return sub


def piece_from_mesh(mesh: IntrinsicMesh) -> FundamentalPiece:
    """
    Recover the piece a mesh file was written from. The parameters are read
    off the loops and the vertex count, then the piece is rebuilt and must
    reproduce the file exactly.
    """
    labels = mesh.loop_labels
    k = len(labels) - 1
    if SIGMA0 not in labels or k < 2 or set(labels) != {SIGMA0, *(b_label(j) for j in range(1, k + 1))}:
        raise InvalidParams(f"mesh loops {list(labels)} are not those of a fundamental piece")
    n_b = len(mesh.loop(SIGMA0))
    if n_b < 8:
        raise InvalidParams(f"loop {SIGMA0} has {n_b} vertices, fewer than 8")
    hub, _ = build_hub(k, n_b)
    # With a taper band the tube's last ring stays separate from the hub.
    rings, rest = divmod(mesh.n_vertices - hub.n_vertices, (k + 1) * n_b)
    resolution = rings - n_b % 2
    if rest != 0 or resolution < 1:
        raise InvalidParams(f"{mesh.n_vertices} vertices do not fit a piece with k={k}, n_b={n_b}")
    piece = build_fundamental_piece(k, n_b, resolution)
    if piece.mesh.mesh_id != mesh.mesh_id:
        raise InvalidParams(f"mesh differs from the piece k={k}, n_b={n_b}, resolution={resolution}")
    return piece
