"""
Flat building blocks: cylinders, polygonal sectors, disks and squares.

Every builder lays its triangles out in the plane (per triangle, so a
cylinder can be unrolled) and keeps only the resulting edge lengths.
"""

import logging
from typing import Callable, Tuple

import numpy as np

from app.errors import InvalidParams
from .mesh import BoundaryLoop, IntrinsicMesh, mesh_from_planar_triangles

logger = logging.getLogger(__name__)

CYLINDER_START = "start"
CYLINDER_END = "end"


def cylinder_grid(n_b: int, n_layers: int) -> np.ndarray:
    """(n_layers + 1, n_b) vertex ids of a cylinder built by build_flat_cylinder."""
    return np.arange((n_layers + 1) * n_b, dtype=np.int64).reshape(n_layers + 1, n_b)


def build_flat_cylinder(n_b: int, n_layers: int, circumference: float = 1.0, length: float = 1.0) -> IntrinsicMesh:
    """
    Structured flat cylinder. Ring r sits at height r * length / n_layers.

    Loop "start" is ring 0 in ascending order; loop "end" is ring n_layers,
    traversed the other way round so the surface stays on its left.
    """
    if n_b < 3 or n_layers < 1:
        raise InvalidParams(f"need n_b >= 3 and n_layers >= 1, got n_b={n_b}, n_layers={n_layers}")
    if circumference <= 0 or length <= 0:
        raise InvalidParams("circumference and length must be positive")

    grid = cylinder_grid(n_b, n_layers)
    h = circumference / n_b
    dz = length / n_layers
    r, i = np.meshgrid(np.arange(n_layers), np.arange(n_b), indexing="ij")
    r, i = r.reshape(-1), i.reshape(-1)
    a, b = grid[r, i], grid[r, (i + 1) % n_b]
    c, d = grid[r + 1, (i + 1) % n_b], grid[r + 1, i]

    # Unrolled chart: vertex (r, i) at (i*h, r*dz), with the wrap edge at x = n_b*h.
    pa = np.column_stack([i * h, r * dz])
    pb = np.column_stack([(i + 1) * h, r * dz])
    pc = np.column_stack([(i + 1) * h, (r + 1) * dz])
    pd = np.column_stack([i * h, (r + 1) * dz])

    triangles = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    corners = np.concatenate([np.stack([pa, pb, pc], axis=1), np.stack([pa, pc, pd], axis=1)])

    top = grid[n_layers]
    loops = [
        BoundaryLoop(CYLINDER_START, tuple(int(v) for v in grid[0])),
        BoundaryLoop(CYLINDER_END, tuple(int(v) for v in np.roll(top[::-1], 1))),
    ]
    return mesh_from_planar_triangles(grid.size, triangles, corners, loops)


def build_flat_taper(n_start: int, n_end: int, circumference: float = 1.0, width: float = None) -> IntrinsicMesh:
    """
    One flat band of the given circumference joining a ring of `n_start`
    vertices (ids 0..n_start-1) to a ring of `n_end` vertices. The loops are
    named and oriented as on build_flat_cylinder, so a taper welds onto a
    cylinder end like another layer.
    """
    if n_start < 3 or n_end < 3:
        raise InvalidParams(f"need at least 3 vertices per ring, got {n_start} and {n_end}")
    width = circumference / max(n_start, n_end) if width is None else width
    if circumference <= 0 or width <= 0:
        raise InvalidParams("circumference and width must be positive")

    bottom = np.arange(n_start, dtype=np.int64)
    top = np.arange(n_start, n_start + n_end, dtype=np.int64)
    triangles, corners = [], []
    i = j = 0
    # Zip the two rings by their positions on the unrolled band.
    while i < n_start or j < n_end:
        lower = (i * circumference / n_start, 0.0)
        upper = (j * circumference / n_end, width)
        if j == n_end or (i < n_start and (i + 1) * n_end <= (j + 1) * n_start):
            triangles.append((bottom[i], bottom[(i + 1) % n_start], top[j % n_end]))
            corners.append((lower, ((i + 1) * circumference / n_start, 0.0), upper))
            i += 1
        else:
            triangles.append((bottom[i % n_start], top[(j + 1) % n_end], top[j]))
            corners.append((lower, ((j + 1) * circumference / n_end, width), upper))
            j += 1

    loops = [
        BoundaryLoop(CYLINDER_START, tuple(int(v) for v in bottom)),
        BoundaryLoop(CYLINDER_END, tuple(int(v) for v in np.roll(top[::-1], 1))),
    ]
    return mesh_from_planar_triangles(n_start + n_end, triangles, corners, loops)


class SectorLayout:
    """
    Structured triangulation of a fan of `m` triangular sectors around a center,
    each subdivided into `p` rings. Ring j holds m*j vertices; vertex 0 is the center.
    """

    def __init__(self, m: int, p: int):
        if m < 3 or p < 1:
            raise InvalidParams(f"need m >= 3 sectors and p >= 1 rings, got m={m}, p={p}")
        self.m = m
        self.p = p
        self.n_vertices = 1 + m * p * (p + 1) // 2

    def index(self, j: int, q: int) -> int:
        """Vertex id of the q-th point (counter-clockwise) on ring j."""
        if j == 0:
            return 0
        return 1 + self.m * j * (j - 1) // 2 + q % (self.m * j)

    def ring(self, j: int) -> np.ndarray:
        return np.array([self.index(j, q) for q in range(self.m * max(j, 1))], dtype=np.int64)

    def side(self, s: int) -> np.ndarray:
        """Outer-ring vertices of sector s from corner s to corner s + 1."""
        return np.array([self.index(self.p, s * self.p + b) for b in range(self.p + 1)], dtype=np.int64)

    def triangles(self) -> np.ndarray:
        tris = []
        for s in range(self.m):
            for j in range(1, self.p + 1):
                inner = lambda b: self.index(j - 1, s * (j - 1) + b)
                outer = lambda b: self.index(j, s * j + b)
                for b in range(j):
                    tris.append((inner(b), outer(b), outer(b + 1)))
                for b in range(j - 1):
                    tris.append((inner(b), outer(b + 1), inner(b + 1)))
        return np.array(tris, dtype=np.int64)

    def positions(self, point: Callable[[int, int, int], Tuple[float, float]]) -> np.ndarray:
        """Planar positions from `point(s, j, b)` giving the b-th point of sector s on ring j."""
        xy = np.zeros((self.n_vertices, 2))
        for s in range(self.m):
            for j in range(1, self.p + 1):
                for b in range(j):
                    xy[self.index(j, s * j + b)] = point(s, j, b)
        return xy


def build_regular_polygon(m: int, side: float, p: int) -> Tuple[IntrinsicMesh, SectorLayout]:
    """Flat regular m-gon of the given side length, each side cut into p segments."""
    layout = SectorLayout(m, p)
    radius = side / (2.0 * np.sin(np.pi / m))
    angles = 2.0 * np.pi * np.arange(m + 1) / m
    corners = radius * np.column_stack([np.cos(angles), np.sin(angles)])

    def point(s: int, j: int, b: int):
        return ((j - b) * corners[s] + b * corners[s + 1]) / p

    xy = layout.positions(point)
    triangles = layout.triangles()
    rim = BoundaryLoop("rim", tuple(int(v) for v in layout.ring(p)))
    mesh = mesh_from_planar_triangles(layout.n_vertices, triangles, xy[triangles], [rim])
    return mesh, layout


def build_polygon_disk(n_rings: int, radius: float = 1.0) -> IntrinsicMesh:
    """Disk of the given radius: ring j has 6j vertices evenly spaced on the circle of radius j/n_rings."""
    if n_rings < 1 or radius <= 0:
        raise InvalidParams(f"need n_rings >= 1 and radius > 0, got {n_rings}, {radius}")
    layout = SectorLayout(6, n_rings)

    def point(s: int, j: int, b: int):
        theta = 2.0 * np.pi * (s * j + b) / (6 * j)
        rho = radius * j / n_rings
        return rho * np.cos(theta), rho * np.sin(theta)

    xy = layout.positions(point)
    triangles = layout.triangles()
    rim = BoundaryLoop("rim", tuple(int(v) for v in layout.ring(n_rings)))
    return mesh_from_planar_triangles(layout.n_vertices, triangles, xy[triangles], [rim])


def build_unit_square(n: int, side: float = 1.0) -> IntrinsicMesh:
    """Flat square sheet on an (n+1) x (n+1) grid with one free boundary loop."""
    if n < 1:
        raise InvalidParams(f"need n >= 1, got {n}")
    ids = np.arange((n + 1) ** 2, dtype=np.int64).reshape(n + 1, n + 1)
    h = side / n
    xy = np.zeros(((n + 1) ** 2, 2))
    jj, ii = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    xy[ids.reshape(-1)] = np.column_stack([ii.reshape(-1) * h, jj.reshape(-1) * h])

    j, i = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    j, i = j.reshape(-1), i.reshape(-1)
    a, b, c, d = ids[j, i], ids[j, i + 1], ids[j + 1, i + 1], ids[j + 1, i]
    triangles = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])

    rim = (
        list(ids[0, :n])
        + list(ids[:n, n])
        + list(ids[n, n:0:-1])
        + list(ids[n:0:-1, 0])
    )
    loop = BoundaryLoop("edge", tuple(int(v) for v in rim))
    return mesh_from_planar_triangles(ids.size, triangles, xy[triangles], [loop])
