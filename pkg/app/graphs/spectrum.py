import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from app.config import settings
from app.errors import InvalidParams, NotConnected
from .regular_graph import RegularGraph, is_connected

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphSpectrum:
    eigenvalues: np.ndarray
    lambda1: float
    fiedler_vector: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def zero_mode(self) -> np.ndarray:
        """Unit eigenvector of eigenvalue 0, sign-normalised; constant on a connected graph."""
        return canonical_sign(self.eigenvectors[:, 0])


def canonical_sign(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip x so that its first entry of non-negligible size is positive."""
    scale = max(float(np.max(np.abs(x))), 1.0) * tol if x.size else tol
    nonzero = np.flatnonzero(np.abs(x) > scale)
    if nonzero.size and x[nonzero[0]] < 0:
        return -x
    return x


def laplacian_spectrum(g: RegularGraph) -> GraphSpectrum:
    if g.n_vertices > settings.max_dense_graph_size:
        raise InvalidParams(
            f"dense eigensolve capped at n <= {settings.max_dense_graph_size}, got {g.n_vertices}"
        )
    if g.n_vertices < 2:
        raise InvalidParams("a spectrum with lambda1 needs at least 2 vertices")
    if not is_connected(g):
        raise NotConnected("graph is disconnected, lambda1 would be 0")

    lap = g.laplacian_matrix().toarray()
    values, vectors = linalg.eigh(lap)

    # Ties in lambda1 resolve to the solver's first vector.
    fiedler = vectors[:, 1] - vectors[:, 1].mean()
    fiedler = canonical_sign(fiedler / np.linalg.norm(fiedler))
    logger.debug(f"Spectrum of n={g.n_vertices}, k={g.degree}: lambda1={values[1]:.6g}")

    return GraphSpectrum(eigenvalues=values, lambda1=float(values[1]), fiedler_vector=fiedler, eigenvectors=vectors)
