"""
Piecewise-linear finite element matrices computed from edge lengths alone.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from app.config import settings
from app.errors import DegenerateTriangle, DimensionMismatch, InvalidParams
from app.surfaces import IntrinsicMesh

logger = logging.getLogger(__name__)


def _select(m: IntrinsicMesh, triangle_mask: Optional[np.ndarray]):
    if triangle_mask is None:
        return m.triangles, m.triangle_lengths, m.triangle_areas
    mask = np.asarray(triangle_mask, dtype=bool)
    if mask.shape != (m.n_triangles,):
        raise DimensionMismatch(f"triangle mask has shape {mask.shape}, mesh has {m.n_triangles} triangles")
    return m.triangles[mask], m.triangle_lengths[mask], m.triangle_areas[mask]


def cotangents(lengths: np.ndarray, areas: np.ndarray) -> np.ndarray:
    """(nT, 3) cotangent of the angle at each corner, by the law of cosines."""
    margin = np.column_stack(
        [
            lengths[:, 1] + lengths[:, 2] - lengths[:, 0],
            lengths[:, 2] + lengths[:, 0] - lengths[:, 1],
            lengths[:, 0] + lengths[:, 1] - lengths[:, 2],
        ]
    ).min(axis=1)
    bad = np.flatnonzero(margin < settings.degenerate_margin)
    if bad.size:
        raise DegenerateTriangle(
            f"{bad.size} triangles fail the triangle inequality margin, first {int(bad[0])} "
            f"with lengths {lengths[bad[0]].tolist()}"
        )
    sq = lengths**2
    a, b, c = sq[:, 0], sq[:, 1], sq[:, 2]
    return np.column_stack([b + c - a, c + a - b, a + b - c]) / (4.0 * areas[:, None])


def assemble_stiffness(m: IntrinsicMesh, triangle_mask: Optional[np.ndarray] = None) -> sparse.csr_matrix:
    """
    Cotangent stiffness matrix: f^T K f is the Dirichlet energy of the
    piecewise-linear interpolant of f. With a mask, only those triangles contribute.
    """
    t, lengths, areas = _select(m, triangle_mask)
    cot = cotangents(lengths, areas)

    # The weight of edge (t1, t2) comes from the corner opposite it, t0; and so on cyclically.
    i = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
    j = np.concatenate([t[:, 2], t[:, 0], t[:, 1]])
    w = 0.5 * np.concatenate([cot[:, 0], cot[:, 1], cot[:, 2]])
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    data = np.concatenate([-w, -w, w, w])
    K = sparse.csr_matrix((data, (rows, cols)), shape=(m.n_vertices, m.n_vertices))
    K.sum_duplicates()
    return K


def assemble_boundary_mass(
    m: IntrinsicMesh,
    loops: Optional[Sequence[str]] = None,
    lumped: bool = False,
) -> sparse.csr_matrix:
    """
    Piecewise-linear mass matrix along the selected boundary loops (all by default).
    Consistent: l/3 on the diagonal and l/6 off it per segment of length l; lumped: l/2 per end.
    """
    labels = m.loop_labels if loops is None else list(loops)
    if not labels:
        raise InvalidParams("select at least one boundary loop")
    segs = np.concatenate([m.loop(label).segments() for label in labels])
    seg_len = m.lengths[m.edge_indices(segs[:, 0], segs[:, 1])]
    u, v = segs[:, 0], segs[:, 1]
    if lumped:
        rows, cols = np.concatenate([u, v]), np.concatenate([u, v])
        data = np.concatenate([seg_len, seg_len]) / 2.0
    else:
        rows = np.concatenate([u, v, u, v])
        cols = np.concatenate([u, v, v, u])
        data = np.concatenate([seg_len / 3.0, seg_len / 3.0, seg_len / 6.0, seg_len / 6.0])
    M = sparse.csr_matrix((data, (rows, cols)), shape=(m.n_vertices, m.n_vertices))
    M.sum_duplicates()
    return M


def lumped_mass(m: IntrinsicMesh) -> np.ndarray:
    """Diagonal of the lumped area mass: one third of every adjacent triangle's area."""
    return np.bincount(m.triangles.reshape(-1), weights=np.repeat(m.triangle_areas / 3.0, 3), minlength=m.n_vertices)


def triangle_energies(m: IntrinsicMesh, f) -> np.ndarray:
    """
    Per-triangle Dirichlet energy area * |grad f|^2, with the gradient taken in
    a planar chart laid out from the edge lengths. Independent of the cotangent path.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (m.n_vertices,):
        raise DimensionMismatch(f"field has shape {f.shape}, mesh has {m.n_vertices} vertices")
    lengths = m.triangle_lengths
    areas = m.triangle_areas
    a, b, c = lengths[:, 0], lengths[:, 1], lengths[:, 2]

    # Chart: corner 0 at the origin, corner 1 at (c, 0), corner 2 at (x, y).
    x = (b**2 + c**2 - a**2) / (2.0 * c)
    y = 2.0 * areas / c
    values = f[m.triangles]
    gx = (values[:, 1] - values[:, 0]) / c
    gy = (values[:, 2] - values[:, 0] - x * gx) / y
    return areas * (gx**2 + gy**2)


def dirichlet_energy(m: IntrinsicMesh, f, triangle_mask: Optional[np.ndarray] = None) -> float:
    energies = triangle_energies(m, f)
    if triangle_mask is not None:
        energies = energies[np.asarray(triangle_mask, dtype=bool)]
    return float(energies.sum())
