import math
from functools import lru_cache

import numpy as np
import pytest

import app.fem.eigen as eigen
from app.errors import ConvergenceFailure, DimensionMismatch, InvalidParams, SingularInterior, ZeroBoundaryNorm
from app.fem import (
    BoundaryCondition,
    DtNOperator,
    EigenOptions,
    LoopCondition,
    assemble_boundary_mass,
    assemble_stiffness,
    boundary_mean,
    dirichlet_energy,
    dtn_schur,
    harmonic_extension,
    lumped_mass,
    neumann_eigenvalues,
    rayleigh_quotient,
    sloshing_mu1,
    sloshing_spectrum,
    steklov_spectrum,
    triangle_energies,
)
from app.graphs import sample_expander
from app.surfaces import (
    IntrinsicMesh,
    build_flat_cylinder,
    build_fundamental_piece,
    build_polygon_disk,
    build_unit_square,
    cylinder_grid,
    glue_surface,
)

MESH_SEEDS = range(20)


def equilateral() -> IntrinsicMesh:
    return IntrinsicMesh.from_arrays(3, [[0, 1, 2]], [[0, 1], [1, 2], [0, 2]], [1.0, 1.0, 1.0], [])


def sloshing_oracle(length: float) -> float:
    return 2.0 * math.pi * math.tanh(2.0 * math.pi * length)


@lru_cache(maxsize=None)
def random_mesh(seed: int) -> IntrinsicMesh:
    """Cylinders, disks, pieces and small glued surfaces with sizes drawn from `seed`."""
    rng = np.random.default_rng(seed)
    kind = seed % 4
    if kind == 0:
        n_b = 24 if seed == 0 else int(rng.integers(8, 25))
        return build_flat_cylinder(n_b, int(rng.integers(2, 7)), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
    if kind == 1:
        return build_polygon_disk(int(rng.integers(3, 9)), rng.uniform(0.5, 2.0))
    if kind == 2:
        n_b = 24 if seed == 2 else int(rng.integers(8, 14))
        return build_fundamental_piece(int(rng.integers(2, 5)), n_b, int(rng.integers(1, 4))).mesh
    piece = build_fundamental_piece(3, int(rng.integers(8, 11)), 1)
    return glue_surface(piece, sample_expander(6, 3, 0.1, seed)).mesh


class TestAssemblyBasic:
    def test_equilateral_stiffness(self):
        K = assemble_stiffness(equilateral()).toarray()
        expected = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]) / (2.0 * np.sqrt(3.0))
        assert np.allclose(K, expected, atol=1e-14)

    def test_constants_in_kernel(self, piece4):
        K = assemble_stiffness(piece4.mesh)
        assert np.abs(K @ np.ones(piece4.mesh.n_vertices)).max() < 1e-12

    def test_symmetric(self, surface_c4):
        K = assemble_stiffness(surface_c4.mesh)
        assert abs(K - K.T).max() < 1e-14

    def test_boundary_mass_totals(self, surface_c4):
        mesh = surface_c4.mesh
        ones = np.ones(mesh.n_vertices)
        assert ones @ (assemble_boundary_mass(mesh) @ ones) == pytest.approx(4.0)
        assert ones @ (assemble_boundary_mass(mesh, ["sigma2"]) @ ones) == pytest.approx(1.0)
        assert assemble_boundary_mass(mesh, lumped=True).sum() == pytest.approx(4.0)

    def test_lumped_mass_is_area(self, unit_cylinder):
        assert lumped_mass(unit_cylinder).sum() == pytest.approx(unit_cylinder.area)

    def test_empty_loop_selection(self, unit_cylinder):
        with pytest.raises(InvalidParams):
            assemble_boundary_mass(unit_cylinder, [])

    def test_field_dimension(self, unit_cylinder):
        with pytest.raises(DimensionMismatch):
            triangle_energies(unit_cylinder, np.zeros(3))


class TestAssemblyRandomMeshes:
    @pytest.mark.parametrize("seed", MESH_SEEDS)
    def test_constants_in_kernel(self, seed):
        K = assemble_stiffness(random_mesh(seed))
        ones = np.ones(K.shape[0])
        assert np.abs(K @ ones).max() <= 1e-12 * abs(K).max()

    @pytest.mark.parametrize("seed", MESH_SEEDS)
    def test_boundary_mass_reproduces_loop_lengths(self, seed):
        mesh = random_mesh(seed)
        ones = np.ones(mesh.n_vertices)
        for label in mesh.loop_labels:
            B = assemble_boundary_mass(mesh, [label])
            assert ones @ (B @ ones) == pytest.approx(mesh.loop_length(label), abs=1e-9)
            assert assemble_boundary_mass(mesh, [label], lumped=True).sum() == pytest.approx(mesh.loop_length(label), abs=1e-9)
        assert ones @ (assemble_boundary_mass(mesh) @ ones) == pytest.approx(mesh.total_boundary_length, abs=1e-9)

    @pytest.mark.parametrize("seed", MESH_SEEDS)
    def test_stiffness_positive_semidefinite(self, seed):
        K = assemble_stiffness(random_mesh(seed)).toarray()
        w = np.linalg.eigvalsh(K)
        assert w[0] >= -1e-10 * w[-1]
        assert abs(w[0]) <= 1e-10 * w[-1]


class TestEnergyIdentity:
    """f^T K f equals the sum of per-triangle gradient energies."""

    @pytest.mark.parametrize("seed", range(20))
    def test_random_fields(self, surface_k5, seed):
        mesh = surface_k5.mesh
        f = np.random.default_rng(seed).normal(size=mesh.n_vertices)
        quadratic = float(f @ (assemble_stiffness(mesh) @ f))
        assert quadratic == pytest.approx(dirichlet_energy(mesh, f), rel=1e-10)

    def test_masked_energies_add_up(self, surface_c4):
        mesh = surface_c4.mesh
        f = np.random.default_rng(1).normal(size=mesh.n_vertices)
        owner = surface_c4.triangle_owner
        parts = [dirichlet_energy(mesh, f, owner == v) for v in range(4)]
        assert sum(parts) == pytest.approx(dirichlet_energy(mesh, f), rel=1e-12)
        K0 = assemble_stiffness(mesh, owner == 0)
        assert float(f @ (K0 @ f)) == pytest.approx(parts[0], rel=1e-10)

    def test_linear_field_on_cylinder(self, unit_cylinder):
        grid = cylinder_grid(16, 8)
        f = np.zeros(unit_cylinder.n_vertices)
        f[grid] = (np.arange(9) / 8.0)[:, None]
        assert dirichlet_energy(unit_cylinder, f) == pytest.approx(1.0)


class TestDtN:
    def test_schur_symmetric_with_constant_kernel(self, unit_cylinder):
        S = dtn_schur(unit_cylinder)
        assert np.allclose(S, S.T)
        assert np.abs(S @ np.ones(S.shape[0])).max() < 1e-10

    @pytest.mark.parametrize("seed", MESH_SEEDS)
    def test_energy_of_extension(self, seed):
        mesh = random_mesh(seed)
        op = DtNOperator(mesh)
        u = np.random.default_rng(100 + seed).normal(size=op.n_boundary)
        f = op.extend(u)
        energy = float(f @ (op.stiffness @ f))
        assert float(u @ op.apply(u)) == pytest.approx(energy, rel=1e-10)
        assert float(u @ (op.schur() @ u)) == pytest.approx(energy, rel=1e-10)
        assert dirichlet_energy(mesh, f) == pytest.approx(energy, rel=1e-10)

    def test_extension_minimises_energy(self, unit_cylinder):
        rng = np.random.default_rng(3)
        op = DtNOperator(unit_cylinder)
        f = op.extend(rng.normal(size=op.n_boundary))
        K = op.stiffness
        base = float(f @ (K @ f))
        for _ in range(5):
            g = f.copy()
            g[op.interior] += 0.1 * rng.normal(size=op.interior.size)
            assert float(g @ (K @ g)) > base

    def test_linear_extension(self, unit_cylinder):
        grid = cylinder_grid(16, 8)
        values = np.zeros(unit_cylinder.n_vertices)
        values[grid[-1]] = 1.0
        f = harmonic_extension(unit_cylinder, values)
        assert np.allclose(f[grid], (np.arange(9) / 8.0)[:, None], atol=1e-10)

    def test_no_steklov_loop(self, unit_cylinder):
        with pytest.raises(SingularInterior):
            DtNOperator(unit_cylinder, [])

    def test_wrong_boundary_size(self, unit_cylinder):
        with pytest.raises(DimensionMismatch):
            DtNOperator(unit_cylinder).extend(np.zeros(5))


class TestBoundaryConditions:
    def test_sloshing_condition(self, unit_cylinder):
        bc = BoundaryCondition.sloshing(unit_cylinder, "end")
        assert bc.conditions == {"start": LoopCondition.NEUMANN, "end": LoopCondition.STEKLOV}
        assert bc.steklov_loops == ["end"]

    def test_all_neumann_rejected(self):
        with pytest.raises(InvalidParams):
            BoundaryCondition({"start": LoopCondition.NEUMANN})

    def test_options_forbid_unknown_keys(self):
        with pytest.raises(ValueError):
            EigenOptions(n_eigs=4, tolerance=1e-3)


class TestSteklovSpectrumValues:
    """Closed-form spectra."""

    def test_cylinder_linear_mode(self, unit_cylinder):
        spectrum = steklov_spectrum(unit_cylinder)
        assert abs(spectrum.sigmas[0]) < 1e-10
        assert spectrum.sigma1 == pytest.approx(2.0, abs=1e-9)
        assert spectrum.sigmas[2] == pytest.approx(2.0 * math.pi * math.tanh(math.pi), rel=5e-2)

    def test_disk(self):
        spectrum = steklov_spectrum(build_polygon_disk(8))
        assert spectrum.sigmas[1] == pytest.approx(1.0, rel=2e-2)
        assert spectrum.sigmas[2] == pytest.approx(spectrum.sigmas[1], rel=1e-8)
        assert spectrum.sigmas[3] == pytest.approx(2.0, rel=3e-2)

    @pytest.mark.slow
    def test_disk_refinement(self):
        errors, errors3 = [], []
        for rings in (10, 20, 41):
            spectrum = steklov_spectrum(build_polygon_disk(rings))
            errors.append(abs(spectrum.sigma1 - 1.0))
            errors3.append(abs(spectrum.sigmas[3] - 2.0))
        assert errors[0] > errors[1] > errors[2]
        assert errors3[0] > errors3[1] > errors3[2]
        assert spectrum.sigma1 == pytest.approx(1.0, rel=1e-2)
        assert spectrum.sigmas[3] == pytest.approx(2.0, rel=1.5e-2)

    def test_sloshing_cylinder(self):
        cylinder = build_flat_cylinder(32, 16)
        assert sloshing_mu1(cylinder) == pytest.approx(sloshing_oracle(1.0), rel=3e-2)

    @pytest.mark.slow
    def test_sloshing_refinement(self):
        cylinder = build_flat_cylinder(64, 32)
        assert sloshing_mu1(cylinder) == pytest.approx(sloshing_oracle(1.0), rel=1e-2)

    def test_sloshing_needs_one_steklov_loop(self, unit_cylinder):
        with pytest.raises(InvalidParams):
            sloshing_mu1(unit_cylinder, BoundaryCondition.all_steklov(unit_cylinder))

    def test_eigenvectors_are_mass_normalised(self, surface_c4):
        spectrum = steklov_spectrum(surface_c4.mesh)
        f = spectrum.eigenfunction(1)
        rq = rayleigh_quotient(surface_c4.mesh, f)
        assert rq.boundary_norm == pytest.approx(1.0, rel=1e-8)
        assert rq.quotient == pytest.approx(spectrum.sigma1, rel=1e-8)
        assert abs(boundary_mean(surface_c4.mesh, f)) < 1e-8

    def test_residuals_recorded(self, surface_c4):
        spectrum = steklov_spectrum(surface_c4.mesh)
        record = spectrum.to_record()
        assert record["solver"] == "dense"
        assert record["mesh_id"] == surface_c4.mesh.mesh_id
        assert len(record["eigenvalues"]) == 6
        assert max(record["residuals"]) < 1e-8

    def test_iterative_matches_dense(self, unit_cylinder):
        dense = steklov_spectrum(unit_cylinder, EigenOptions(solver="dense", n_eigs=4))
        iterative = steklov_spectrum(unit_cylinder, EigenOptions(solver="iterative", n_eigs=4))
        assert iterative.solver == "iterative"
        assert np.allclose(iterative.sigmas, dense.sigmas, atol=1e-8)

    def test_unreachable_tolerance(self, unit_cylinder):
        with pytest.raises(ConvergenceFailure):
            steklov_spectrum(unit_cylinder, EigenOptions(tol_res=1e-300))

    def test_residual_is_not_scaled_by_eigenvalue(self, monkeypatch):
        solve = eigen._dense_solve

        def shifted(op, M_bb, n_eigs):
            w, U = solve(op, M_bb, n_eigs)
            w = w.copy()
            w[1:] += 1e-6
            return w, U

        monkeypatch.setattr(eigen, "_dense_solve", shifted)
        disk = build_polygon_disk(6)
        spectrum = steklov_spectrum(disk, EigenOptions(n_eigs=6, solver="dense", tol_res=1e-3))
        assert spectrum.sigmas[5] > 2.0
        b = spectrum.boundary_vertices
        M = assemble_boundary_mass(disk)[b][:, b].toarray()
        for j in range(1, 6):
            u = spectrum.boundary_vectors[:, j]
            expected = 1e-6 * np.linalg.norm(M @ u) / np.linalg.norm(u)
            assert spectrum.residuals[j] == pytest.approx(expected, rel=1e-4)

    def test_residual_above_tolerance_fails(self, monkeypatch):
        solve = eigen._dense_solve

        def shifted(op, M_bb, n_eigs):
            w, U = solve(op, M_bb, n_eigs)
            return w + np.r_[0.0, np.full(n_eigs - 1, 1e-3)], U

        monkeypatch.setattr(eigen, "_dense_solve", shifted)
        with pytest.raises(ConvergenceFailure):
            steklov_spectrum(build_polygon_disk(6), EigenOptions(solver="dense"))

    def test_problem_labels(self, piece2):
        assert steklov_spectrum(piece2.mesh).problem == "steklov"
        assert steklov_spectrum(piece2.mesh, steklov_loops=["b2", "sigma0", "b1"]).problem == "steklov"
        mixed = steklov_spectrum(piece2.mesh, steklov_loops=["sigma0"])
        assert mixed.problem == "mixed"
        assert mixed.to_record()["problem"] == "mixed"
        cylinder = build_flat_cylinder(16, 8)
        assert sloshing_spectrum(cylinder, BoundaryCondition.sloshing(cylinder, "start")).problem == "sloshing"


class TestNeumann:
    def test_unit_square(self):
        w = neumann_eigenvalues(build_unit_square(16))
        assert abs(w[0]) < 1e-10
        assert w[1] == pytest.approx(math.pi**2, rel=1e-2)
        assert w[2] == pytest.approx(w[1], rel=1e-8)

    def test_zero_boundary_norm(self, unit_cylinder):
        f = np.zeros(unit_cylinder.n_vertices)
        f[cylinder_grid(16, 8)[4]] = 1.0
        with pytest.raises(ZeroBoundaryNorm):
            rayleigh_quotient(unit_cylinder, f)
