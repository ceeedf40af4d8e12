"""
Trial functions and the mean/fluctuation estimates on a glued surface.

On every collar C_v a field splits into its ring means f_bar (a function of
the distance to Sigma_v) and a fluctuation f_tilde with zero mean on every
ring. The local estimate bounds the fluctuation on Sigma_v by the collar
energy over the sloshing eigenvalue mu; the global estimate bounds the
spread of the loop means x(v) by the energy of doubled pieces.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from app.config import settings
from app.errors import DimensionMismatch
from app.fem import EigenOptions, assemble_stiffness, assemble_boundary_mass, rayleigh_quotient, sloshing_mu1, triangle_energies
from app.graphs import RegularGraph, laplacian_spectrum, quadratic_form
from app.surfaces import GluedSurface, collar_mesh

logger = logging.getLogger(__name__)


class CollarDecomposition(BaseModel):
    vertex: int
    energy: float
    mean_energy: float
    profile_energy: float
    fluctuation_energy: float
    fluctuation_boundary_norm: float
    max_ring_mean_residual: float

    @property
    def identity_error(self) -> float:
        scale = max(abs(self.energy), np.finfo(float).tiny)
        return abs(self.energy - self.mean_energy - self.fluctuation_energy) / scale


class LocalEstimateReport(BaseModel):
    mu: float
    fluctuation_boundary_norm: float
    energy: float
    bound: float
    margin: float
    worst_collar_margin: float
    max_identity_error: float
    max_ring_mean_residual: float
    passed: bool


class GlobalEstimateReport(BaseModel):
    x: List[float]
    x_sum: float
    edge_ratios: List[float]
    c_emp: float
    q_graph: float
    energy: float
    global_ratio: float
    boundary_norm: float
    fluctuation_boundary_norm: float
    inequality_rhs: float
    inequality_margin: float
    lambda1_graph: float
    passed: bool


class TrialReport(BaseModel):
    energy: float
    expected_energy: float
    boundary_norm: float
    boundary_mean: float
    quotient: float


class EstimateService:
    """
    Estimates for one glued surface. The collar sloshing eigenvalue is
    computed once, on the collar of the surface's own fundamental piece.
    """

    def __init__(self, surface: GluedSurface, mu: Optional[float] = None, opts: Optional[EigenOptions] = None):
        self.surface = surface
        self.mesh = surface.mesh
        self.opts = opts or EigenOptions()
        self._mu = mu
        self._stiffness = None
        self._boundary_mass = None
        self._collar_masks: Optional[List[np.ndarray]] = None

    @property
    def mu(self) -> float:
        if self._mu is None:
            collar = collar_mesh(self.surface.piece)
            self._mu = sloshing_mu1(collar, opts=self.opts)
            logger.info(f"Collar sloshing eigenvalue mu={self._mu:.8g}")
        return self._mu

    @property
    def stiffness(self):
        if self._stiffness is None:
            self._stiffness = assemble_stiffness(self.mesh)
        return self._stiffness

    @property
    def boundary_mass(self):
        if self._boundary_mass is None:
            self._boundary_mass = assemble_boundary_mass(self.mesh)
        return self._boundary_mass

    def collar_mask(self, v: int) -> np.ndarray:
        if self._collar_masks is None:
            masks = []
            for grid in self.surface.collar_maps:
                inside = np.zeros(self.mesh.n_vertices, dtype=bool)
                inside[grid.reshape(-1)] = True
                masks.append(np.all(inside[self.mesh.triangles], axis=1))
            self._collar_masks = masks
        return self._collar_masks[v]

    def _check_field(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.mesh.n_vertices,):
            raise DimensionMismatch(f"field has shape {f.shape}, surface has {self.mesh.n_vertices} vertices")
        return f

    def ring_weights(self, ring: np.ndarray) -> np.ndarray:
        """Loop mass row sums along a closed ring: half of each adjacent segment."""
        seg = self.mesh.lengths[self.mesh.edge_indices(ring, np.roll(ring, -1))]
        return 0.5 * (seg + np.roll(seg, 1))

    def loop_means(self, f) -> np.ndarray:
        """x_f(v): mean of f over Sigma_v in the loop mass pairing."""
        f = self._check_field(f)
        means = np.empty(self.surface.n_pieces)
        for v, grid in enumerate(self.surface.collar_maps):
            w = self.ring_weights(grid[0])
            means[v] = float(w @ f[grid[0]] / w.sum())
        return means

    def decompose(self, f, v: int) -> CollarDecomposition:
        f = self._check_field(f)
        grid = self.surface.collar_maps[v]
        weights = np.array([self.ring_weights(ring) for ring in grid])
        means = (weights * f[grid]).sum(axis=1) / weights.sum(axis=1)

        f_bar = f.copy()
        f_bar[grid] = means[:, None]
        f_tilde = np.zeros_like(f)
        f_tilde[grid] = f[grid] - means[:, None]

        mask = self.collar_mask(v)
        energy = float(triangle_energies(self.mesh, f)[mask].sum())
        mean_energy = float(triangle_energies(self.mesh, f_bar)[mask].sum())
        fluctuation_energy = float(triangle_energies(self.mesh, f_tilde)[mask].sum())

        spacing = self.mesh.lengths[self.mesh.edge_indices(grid[:-1, 0], grid[1:, 0])]
        circumference = self.ring_weights(grid[0]).sum()
        profile_energy = float(circumference * np.sum(np.diff(means) ** 2 / spacing))

        ring_residual = np.abs((weights * f_tilde[grid]).sum(axis=1)).max()
        boundary_ring = grid[0]
        M_loop = self.boundary_mass[boundary_ring][:, boundary_ring]
        fluct_norm = float(f_tilde[boundary_ring] @ (M_loop @ f_tilde[boundary_ring]))
        return CollarDecomposition(
            vertex=v,
            energy=energy,
            mean_energy=mean_energy,
            profile_energy=profile_energy,
            fluctuation_energy=fluctuation_energy,
            fluctuation_boundary_norm=fluct_norm,
            max_ring_mean_residual=float(ring_residual),
        )

    def verify_local_estimate(self, f, slack: Optional[float] = None) -> LocalEstimateReport:
        slack = settings.lower_bound_tol if slack is None else slack
        f = self._check_field(f)
        parts = [self.decompose(f, v) for v in range(self.surface.n_pieces)]
        mu = self.mu
        energy = float(f @ (self.stiffness @ f))
        fluct = sum(p.fluctuation_boundary_norm for p in parts)
        bound = energy / mu
        worst = min(p.energy / mu - p.fluctuation_boundary_norm for p in parts)
        margin = bound - fluct
        scale = max(1.0, bound)
        report = LocalEstimateReport(
            mu=mu,
            fluctuation_boundary_norm=fluct,
            energy=energy,
            bound=bound,
            margin=margin,
            worst_collar_margin=worst,
            max_identity_error=max(p.identity_error for p in parts),
            max_ring_mean_residual=max(p.max_ring_mean_residual for p in parts),
            passed=bool(margin >= -slack * scale and worst >= -slack * scale),
        )
        logger.info(f"Local estimate: fluctuation {fluct:.6g} <= energy/mu {bound:.6g} (margin {margin:.3g})")
        return report

    def piece_energies(self, f) -> np.ndarray:
        f = self._check_field(f)
        owner = self.surface.triangle_owner
        return np.bincount(owner, weights=triangle_energies(self.mesh, f), minlength=self.surface.n_pieces)

    def verify_global_estimate(self, f, lambda1: float, slack: Optional[float] = None) -> GlobalEstimateReport:
        slack = settings.lower_bound_tol if slack is None else slack
        f = self._check_field(f)
        g = self.surface.graph
        x = self.loop_means(f)
        per_piece = self.piece_energies(f)

        ratios = []
        for v, w in g.edges:
            diff = (x[v] - x[w]) ** 2
            doubled = per_piece[v] + per_piece[w]
            ratios.append(float(diff / doubled) if doubled > 0 else 0.0)

        energy = float(f @ (self.stiffness @ f))
        q = float(quadratic_form(g, x))
        boundary_norm = float(f @ (self.boundary_mass @ f))
        fluct = sum(self.decompose(f, v).fluctuation_boundary_norm for v in range(self.surface.n_pieces))
        rhs = q / lambda1 + fluct
        margin = rhs - boundary_norm
        x_sum = float(x.sum())
        report = GlobalEstimateReport(
            x=[float(t) for t in x],
            x_sum=x_sum,
            edge_ratios=ratios,
            c_emp=max(ratios) if ratios else 0.0,
            q_graph=q,
            energy=energy,
            global_ratio=q / energy if energy > 0 else 0.0,
            boundary_norm=boundary_norm,
            fluctuation_boundary_norm=fluct,
            inequality_rhs=rhs,
            inequality_margin=margin,
            lambda1_graph=lambda1,
            passed=bool(margin >= -slack * max(1.0, rhs) and abs(x_sum) <= slack * max(1.0, np.abs(x).sum())),
        )
        logger.info(f"Global estimate: C_emp={report.c_emp:.6g}, boundary norm {boundary_norm:.6g} <= {rhs:.6g}")
        return report

    def trial_function(self, x) -> np.ndarray:
        """x(v) on Sigma_v, decaying linearly to zero across the collar C_v, zero elsewhere."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.surface.n_pieces,):
            raise DimensionMismatch(f"expected {self.surface.n_pieces} vertex values, got {x.shape}")
        f = np.zeros(self.mesh.n_vertices)
        for v, grid in enumerate(self.surface.collar_maps):
            n_rings = grid.shape[0] - 1
            profile = 1.0 - np.arange(n_rings + 1) / n_rings
            f[grid] = x[v] * profile[:, None]
        return f

    def edge_trial_function(self, x) -> np.ndarray:
        """
        x(v) on each copy M_v, except along its sewing tubes: across the
        double tube of edge (v, w) the field runs linearly from x(v) to x(w).
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.surface.n_pieces,):
            raise DimensionMismatch(f"expected {self.surface.n_pieces} vertex values, got {x.shape}")
        f = np.zeros(self.mesh.n_vertices)
        for v, vertices in enumerate(self.surface.piece_vertex_maps):
            f[vertices] = x[v]
        for slot in self.surface.edge_slots:
            for near, far, index in ((slot.v, slot.w, slot.i), (slot.w, slot.v, slot.j)):
                grid = self.surface.tube_grid(near, index)
                n_rings = grid.shape[0] - 1
                t = (n_rings - np.arange(n_rings + 1)) / n_rings
                f[grid] = (x[near] + 0.5 * (x[far] - x[near]) * t)[:, None]
        return f

    def _trial_report(self, f: np.ndarray, expected_energy: float) -> TrialReport:
        rq = rayleigh_quotient(self.mesh, f)
        mean = float((self.boundary_mass @ f).sum() / self.boundary_mass.sum())
        return TrialReport(
            energy=rq.energy,
            expected_energy=expected_energy,
            boundary_norm=rq.boundary_norm,
            boundary_mean=mean,
            quotient=rq.quotient,
        )

    def trial_report(self, x) -> TrialReport:
        x = np.asarray(x, dtype=float)
        piece = self.surface.piece
        ring = piece.collar_vertices
        length = piece.mesh.lengths[piece.mesh.edge_indices(ring[:-1, 0], ring[1:, 0])].sum()
        circumference = piece.mesh.loop_length(piece.sigma0_loop)
        return self._trial_report(self.trial_function(x), float(np.sum(x**2)) * circumference / length)

    def edge_trial_report(self, x) -> TrialReport:
        x = np.asarray(x, dtype=float)
        return self._trial_report(self.edge_trial_function(x), 0.5 * quadratic_form(self.surface.graph, x))


def trial_function_quotient(surface: GluedSurface, x) -> float:
    return EstimateService(surface).trial_report(x).quotient


def edge_trial_quotient(surface: GluedSurface, x) -> float:
    return EstimateService(surface).edge_trial_report(x).quotient


def verify_local_estimate(surface: GluedSurface, f, mu: Optional[float] = None) -> LocalEstimateReport:
    return EstimateService(surface, mu=mu).verify_local_estimate(f)


def verify_global_estimate(
    surface: GluedSurface,
    graph: RegularGraph,
    f,
    lambda1: Optional[float] = None,
) -> GlobalEstimateReport:
    if graph.n_vertices != surface.n_pieces or graph.edges != surface.graph.edges:
        raise DimensionMismatch("graph does not match the surface it is checked against")
    lambda1 = laplacian_spectrum(graph).lambda1 if lambda1 is None else lambda1
    return EstimateService(surface).verify_global_estimate(f, lambda1)


def lower_bound(lambda1: float, mu: float, c_emp: float, k: int) -> float:
    """sigma_1 >= lambda_1 / (lambda_1 / mu + C_emp k), with C_emp the worst doubled-piece ratio."""
    return lambda1 / (lambda1 / mu + c_emp * k)
