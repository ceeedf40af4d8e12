"""
Steklov, sloshing and Neumann eigensolvers.

The Steklov problem is solved on the boundary: S u = sigma M_b u with S the
discrete Dirichlet-to-Neumann matrix and M_b the consistent loop mass. Small
problems use a dense generalized symmetric solve; large ones fall back to
shift-invert Lanczos on the full pencil K f = sigma B f, B the boundary mass
padded with zeros.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from app.config import settings
from app.errors import ConvergenceFailure, InvalidParams, InvariantViolation, NotConnected, ZeroBoundaryNorm
from app.surfaces import IntrinsicMesh
from .assembly import assemble_boundary_mass, assemble_stiffness, lumped_mass
from .dtn import DtNOperator

logger = logging.getLogger(__name__)

SHIFT = -1e-3


class EigenOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_eigs: int = Field(default_factory=lambda: settings.n_eigs, ge=2)
    tol_res: float = Field(default_factory=lambda: settings.tol_res, gt=0)
    max_iterations: int = Field(default_factory=lambda: settings.max_iterations, gt=0)
    dense_fallback_threshold: int = Field(default_factory=lambda: settings.dense_fallback_threshold, gt=0)
    solver: Literal["auto", "dense", "iterative"] = "auto"


class LoopCondition(str, Enum):
    STEKLOV = "steklov"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class BoundaryCondition:
    conditions: Dict[str, LoopCondition]

    def __post_init__(self):
        if LoopCondition.STEKLOV not in self.conditions.values():
            raise InvalidParams("at least one boundary loop must carry the Steklov condition")

    @classmethod
    def all_steklov(cls, m: IntrinsicMesh) -> "BoundaryCondition":
        return cls({label: LoopCondition.STEKLOV for label in m.loop_labels})

    @classmethod
    def sloshing(cls, m: IntrinsicMesh, steklov_loop: str) -> "BoundaryCondition":
        m.loop(steklov_loop)
        return cls(
            {
                label: LoopCondition.STEKLOV if label == steklov_loop else LoopCondition.NEUMANN
                for label in m.loop_labels
            }
        )

    @property
    def steklov_loops(self) -> List[str]:
        return [label for label, c in self.conditions.items() if c == LoopCondition.STEKLOV]


@dataclass(frozen=True, eq=False)
class SteklovSpectrum:
    sigmas: np.ndarray
    boundary_vectors: np.ndarray
    interior_extensions: np.ndarray
    boundary_vertices: np.ndarray
    residuals: np.ndarray
    mesh_id: str
    problem: str = "steklov"
    solver: str = "dense"
    steklov_loops: Sequence[str] = field(default_factory=tuple)

    @property
    def n_boundary_unknowns(self) -> int:
        return int(self.boundary_vertices.size)

    @property
    def sigma1(self) -> float:
        """First nonzero eigenvalue; sigmas[0] is the verified constant mode."""
        return float(self.sigmas[1])

    def eigenfunction(self, index: int = 1) -> np.ndarray:
        return self.interior_extensions[:, index]

    def to_record(self) -> Dict[str, Any]:
        return {
            "mesh_id": self.mesh_id,
            "problem": self.problem,
            "eigenvalues": [float(s) for s in self.sigmas],
            "residuals": [float(r) for r in self.residuals],
            "n_boundary_unknowns": self.n_boundary_unknowns,
            "solver": self.solver,
        }


def _dense_solve(op: DtNOperator, M_bb: np.ndarray, n_eigs: int):
    S = op.schur()
    w, U = scipy.linalg.eigh(S, M_bb, subset_by_index=[0, n_eigs - 1])
    return w, U


def _iterative_solve(op: DtNOperator, B: sparse.csr_matrix, n_eigs: int, opts: EigenOptions):
    try:
        w, F = eigsh(
            op.stiffness.tocsc(),
            k=n_eigs,
            M=B.tocsc(),
            sigma=SHIFT,
            which="LM",
            maxiter=opts.max_iterations,
        )
    except ArpackNoConvergence as e:
        raise ConvergenceFailure(f"shift-invert Lanczos did not converge in {opts.max_iterations} iterations: {e}")
    order = np.argsort(w)
    return w[order], F[op.boundary][:, order]


def steklov_spectrum(
    m: IntrinsicMesh,
    opts: Optional[EigenOptions] = None,
    steklov_loops: Optional[Sequence[str]] = None,
    problem: Optional[str] = None,
) -> SteklovSpectrum:
    """
    Lowest eigenpairs of S u = sigma M_b u, Neumann on the loops left out of
    `steklov_loops`. Every pair must satisfy |S u - sigma M_b u| <= tol_res |u|.
    The problem is labelled "mixed" unless every loop is Steklov.
    """
    opts = opts or EigenOptions()
    op = DtNOperator(m, steklov_loops)
    if problem is None:
        problem = "steklov" if set(op.steklov_loops) == set(m.loop_labels) else "mixed"
    B = assemble_boundary_mass(m, op.steklov_loops)
    M_bb = B[op.boundary][:, op.boundary].toarray()
    n_eigs = min(opts.n_eigs, op.n_boundary - 1)
    if n_eigs < 2:
        raise InvalidParams(f"only {op.n_boundary} boundary unknowns, need at least 3")

    use_dense = opts.solver == "dense" or (opts.solver == "auto" and op.n_boundary <= opts.dense_fallback_threshold)
    if use_dense:
        w, U = _dense_solve(op, M_bb, n_eigs)
        solver = "dense"
    else:
        logger.warning(
            f"{op.n_boundary} boundary unknowns above {opts.dense_fallback_threshold}, using shift-invert Lanczos"
        )
        w, U = _iterative_solve(op, B, n_eigs, opts)
        solver = "iterative"

    norms = np.sqrt(np.einsum("ij,ij->j", U, M_bb @ U))
    U = U / norms
    residuals = np.empty(n_eigs)
    for j in range(n_eigs):
        u = U[:, j]
        r = op.apply(u) - w[j] * (M_bb @ u)
        residuals[j] = np.linalg.norm(r) / np.linalg.norm(u)
    worst = float(residuals.max())
    if worst > opts.tol_res:
        raise ConvergenceFailure(f"eigen residual {worst:.3g} above tolerance {opts.tol_res}", residual=worst)
    if worst > 0.1 * opts.tol_res:
        logger.warning(f"Eigen residual {worst:.3g} is close to the tolerance {opts.tol_res}")

    _check_zero_mode(w, U, M_bb)
    logger.info(
        f"Solved {problem} spectrum on mesh {m.mesh_id} ({solver}, {op.n_boundary} unknowns): "
        f"sigma1={w[1]:.8g}"
    )
    return SteklovSpectrum(
        sigmas=w,
        boundary_vectors=U,
        interior_extensions=op.extend(U),
        boundary_vertices=op.boundary,
        residuals=residuals,
        mesh_id=m.mesh_id,
        problem=problem,
        solver=solver,
        steklov_loops=op.steklov_loops,
    )


def _check_zero_mode(w: np.ndarray, U: np.ndarray, M_bb: np.ndarray) -> None:
    tol = settings.zero_mode_tol * max(1.0, abs(w[1]))
    if abs(w[0]) > tol:
        raise InvariantViolation("zero-mode", f"lowest eigenvalue {w[0]!r} is not zero within {tol:.3g}")
    u = U[:, 0]
    ones = np.ones_like(u)
    mean = (ones @ M_bb @ u) / (ones @ M_bb @ ones)
    spread = np.linalg.norm(u - mean) / np.linalg.norm(u)
    if spread > np.sqrt(settings.zero_mode_tol):
        raise InvariantViolation("zero-mode", f"lowest eigenvector is not constant (relative spread {spread:.3g})")


def sloshing_mu1(
    cylinder: IntrinsicMesh,
    bc: Optional[BoundaryCondition] = None,
    opts: Optional[EigenOptions] = None,
) -> float:
    """First nonzero eigenvalue with the Steklov condition on one loop and Neumann on the rest."""
    bc = bc or BoundaryCondition.sloshing(cylinder, cylinder.loop_labels[0])
    loops = bc.steklov_loops
    if len(loops) != 1:
        raise InvalidParams(f"sloshing needs exactly one Steklov loop, got {loops}")
    return sloshing_spectrum(cylinder, bc, opts).sigma1


def sloshing_spectrum(cylinder: IntrinsicMesh, bc: BoundaryCondition, opts: Optional[EigenOptions] = None) -> SteklovSpectrum:
    return steklov_spectrum(cylinder, opts, bc.steklov_loops, problem="sloshing")


def neumann_eigenvalues(m: IntrinsicMesh, opts: Optional[EigenOptions] = None) -> np.ndarray:
    """Lowest eigenvalues of K f = lambda M f with the lumped area mass."""
    opts = opts or EigenOptions()
    K = assemble_stiffness(m)
    mass = lumped_mass(m)
    adjacency = sparse.coo_matrix((np.ones(m.n_edges), (m.edges[:, 0], m.edges[:, 1])), shape=K.shape)
    n_comp, _ = connected_components(adjacency, directed=False)
    if n_comp != 1:
        raise NotConnected(f"mesh has {n_comp} components")
    n_eigs = min(opts.n_eigs, m.n_vertices - 1)

    use_dense = opts.solver == "dense" or (opts.solver == "auto" and m.n_vertices <= opts.dense_fallback_threshold)
    if use_dense:
        w = scipy.linalg.eigh(K.toarray(), np.diag(mass), eigvals_only=True, subset_by_index=[0, n_eigs - 1])
    else:
        try:
            w = eigsh(
                K.tocsc(),
                k=n_eigs,
                M=sparse.diags(mass).tocsc(),
                sigma=SHIFT,
                which="LM",
                maxiter=opts.max_iterations,
                return_eigenvectors=False,
            )
        except ArpackNoConvergence as e:
            raise ConvergenceFailure(f"Neumann eigensolve did not converge: {e}")
        w = np.sort(w)
    if abs(w[0]) > settings.zero_mode_tol * max(1.0, abs(w[1])):
        raise InvariantViolation("zero-mode", f"lowest Neumann eigenvalue {w[0]!r} is not zero")
    return w


def neumann_lambda1(m: IntrinsicMesh, opts: Optional[EigenOptions] = None) -> float:
    lambda1 = float(neumann_eigenvalues(m, opts)[1])
    logger.info(f"Neumann lambda1 on mesh {m.mesh_id}: {lambda1:.8g}")
    return lambda1


class RayleighQuotient(NamedTuple):
    energy: float
    boundary_norm: float
    quotient: float


def rayleigh_quotient(m: IntrinsicMesh, f, loops: Optional[Sequence[str]] = None) -> RayleighQuotient:
    f = np.asarray(f, dtype=float)
    energy = float(f @ (assemble_stiffness(m) @ f))
    boundary_norm = float(f @ (assemble_boundary_mass(m, loops) @ f))
    if boundary_norm <= np.finfo(float).tiny:
        raise ZeroBoundaryNorm("field vanishes on the selected boundary loops")
    return RayleighQuotient(energy, boundary_norm, energy / boundary_norm)


def boundary_mean(m: IntrinsicMesh, f, loops: Optional[Sequence[str]] = None) -> float:
    """Mass-weighted mean of f over the selected loops."""
    M = assemble_boundary_mass(m, loops)
    f = np.asarray(f, dtype=float)
    return float((M @ f).sum() / M.sum())
