"""
Discrete Dirichlet-to-Neumann operator.

Vertices on the Steklov loops are the boundary unknowns b; everything else,
Neumann loops included, is eliminated:

    S = K_bb - K_bi K_ii^{-1} K_ib
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from app.config import settings
from app.errors import DimensionMismatch, SingularInterior
from app.surfaces import IntrinsicMesh
from .assembly import assemble_stiffness

logger = logging.getLogger(__name__)


class DtNOperator:
    """
    Solver context for one mesh and one choice of Steklov loops. The sparse LU
    of K_ii is computed once; the object is read-only afterwards.
    """

    def __init__(self, m: IntrinsicMesh, steklov_loops: Optional[Sequence[str]] = None):
        self.mesh = m
        self.steklov_loops = tuple(m.loop_labels if steklov_loops is None else steklov_loops)
        if not self.steklov_loops:
            raise SingularInterior("no Steklov loop selected, the interior block is singular")
        self.stiffness = assemble_stiffness(m)
        self.boundary = m.boundary_vertices(self.steklov_loops)
        is_boundary = np.zeros(m.n_vertices, dtype=bool)
        is_boundary[self.boundary] = True
        self.interior = np.flatnonzero(~is_boundary)
        self._check_components(is_boundary)

        K = self.stiffness
        self.K_bb = K[self.boundary][:, self.boundary].tocsr()
        self.K_ib = K[self.interior][:, self.boundary].tocsc()
        self.K_ii = K[self.interior][:, self.interior].tocsc()
        self._lu = None
        if self.interior.size:
            try:
                self._lu = splu(self.K_ii, permc_spec="MMD_AT_PLUS_A")
            except RuntimeError as e:
                raise SingularInterior(f"interior factorisation failed: {e}")
        self._schur: Optional[np.ndarray] = None
        logger.debug(
            f"DtN context for mesh {m.mesh_id}: {self.boundary.size} boundary, {self.interior.size} interior unknowns"
        )

    def _check_components(self, is_boundary: np.ndarray) -> None:
        m = self.mesh
        n = m.n_vertices
        adjacency = sparse.coo_matrix((np.ones(m.n_edges), (m.edges[:, 0], m.edges[:, 1])), shape=(n, n))
        n_comp, component = connected_components(adjacency, directed=False)
        anchored = np.zeros(n_comp, dtype=bool)
        anchored[component[is_boundary]] = True
        if not anchored.all():
            raise SingularInterior(f"{int((~anchored).sum())} mesh components touch no Steklov loop")

    @property
    def n_boundary(self) -> int:
        return int(self.boundary.size)

    def solve_interior(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is None:
            return np.zeros((0,) + rhs.shape[1:])
        return self._lu.solve(np.asarray(rhs, dtype=float))

    def extend(self, u_b) -> np.ndarray:
        """Harmonic extension of boundary values to all vertices."""
        u_b = np.asarray(u_b, dtype=float)
        if u_b.shape[0] != self.n_boundary:
            raise DimensionMismatch(f"expected {self.n_boundary} boundary values, got {u_b.shape[0]}")
        f = np.zeros((self.mesh.n_vertices,) + u_b.shape[1:])
        f[self.boundary] = u_b
        if self.interior.size:
            rhs = -(self.K_ib @ u_b)
            f_i = self.solve_interior(rhs)
            residual = np.linalg.norm(self.K_ii @ f_i - rhs)
            scale = max(np.linalg.norm(rhs), 1.0)
            if residual > 1e-10 * scale:
                logger.warning(f"Interior solve residual {residual:.3g} above 1e-10 relative")
            f[self.interior] = f_i
        return f

    def apply(self, u_b) -> np.ndarray:
        """S u without forming S."""
        u_b = np.asarray(u_b, dtype=float)
        out = self.K_bb @ u_b
        if self.interior.size:
            out = out - self.K_ib.T @ self.solve_interior(self.K_ib @ u_b)
        return out

    def schur(self) -> np.ndarray:
        """Dense symmetric S, assembled in column blocks."""
        if self._schur is not None:
            return self._schur
        S = self.K_bb.toarray()
        if self.interior.size:
            block = settings.schur_block_size
            for start in range(0, self.n_boundary, block):
                stop = min(start + block, self.n_boundary)
                cols = self.K_ib[:, start:stop].toarray()
                S[:, start:stop] -= self.K_ib.T @ self.solve_interior(cols)
        S = 0.5 * (S + S.T)
        self._schur = S
        return S


def dtn_schur(m: IntrinsicMesh, steklov_loops: Optional[Sequence[str]] = None) -> np.ndarray:
    return DtNOperator(m, steklov_loops).schur()


def harmonic_extension(m: IntrinsicMesh, boundary_values, loops: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Extend boundary data harmonically. `boundary_values` is either one value
    per boundary vertex (ascending vertex order) or a full vertex vector whose
    boundary entries are used.
    """
    op = DtNOperator(m, loops)
    values = np.asarray(boundary_values, dtype=float)
    if values.shape[0] == m.n_vertices and values.shape[0] != op.n_boundary:
        values = values[op.boundary]
    return op.extend(values)
