from functools import lru_cache

import numpy as np
import pytest

from app.errors import (
    DegreeMismatch,
    DimensionMismatch,
    DuplicateEdge,
    GraphFormatError,
    InvalidParams,
    NotConnected,
    OddTotalDegree,
    SamplingExhausted,
    SelfLoop,
)
from app.graphs import (
    build_regular_graph,
    format_graph,
    generate_expander_family,
    is_connected,
    laplacian_spectrum,
    parse_graph,
    quadratic_form,
    read_graph,
    sample_expander,
    write_graph,
)

GRAPH_SEEDS = range(20)


@lru_cache(maxsize=None)
def sampled_graph(seed: int):
    """A sampled expander whose size and degree are drawn from `seed`."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, 6))
    n = int(rng.integers(k + 3, 41))
    n += (n * k) % 2
    return sample_expander(n, k, 0.05, seed)


class TestRegularGraphBasic:
    """Construction contract."""

    def test_edges_are_sorted_pairs(self, c4):
        assert c4.edges == ((0, 1), (0, 3), (1, 2), (2, 3))
        assert c4.n_edges == 4

    def test_adjacency_ascending(self, k5):
        assert k5.adjacency[2] == (0, 1, 3, 4)

    def test_laplacian_row_sums_vanish(self, prism):
        lap = prism.laplacian_matrix().toarray()
        assert np.allclose(lap.sum(axis=1), 0.0)
        assert np.allclose(np.diag(lap), 3.0)

    def test_connected(self, prism):
        assert is_connected(prism)


class TestRegularGraphEdgeCases:
    def test_odd_total_degree(self):
        with pytest.raises(OddTotalDegree):
            build_regular_graph(5, 3, [])

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            build_regular_graph(4, 2, [(0, 0), (1, 2), (2, 3), (1, 3)])

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdge):
            build_regular_graph(4, 2, [(0, 1), (1, 0), (2, 3), (2, 3)])

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            build_regular_graph(4, 2, [(0, 1), (1, 2), (2, 3)])

    def test_endpoint_out_of_range(self):
        with pytest.raises(InvalidParams):
            build_regular_graph(4, 2, [(0, 1), (1, 2), (2, 3), (3, 4)])

    def test_two_triangles_are_disconnected(self):
        g = build_regular_graph(6, 2, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
        assert not is_connected(g)
        with pytest.raises(NotConnected):
            laplacian_spectrum(g)

    def test_quadratic_form_dimension(self, c4):
        with pytest.raises(DimensionMismatch):
            quadratic_form(c4, np.ones(3))


class TestQuadraticFormValues:
    def test_alternating_vector_on_c4(self, c4):
        assert quadratic_form(c4, [1.0, -1.0, 1.0, -1.0]) == pytest.approx(16.0)

    def test_constant_vector(self, k5):
        assert quadratic_form(k5, np.full(5, 3.0)) == 0.0

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_laplacian_matrix(self, prism, seed):
        x = np.random.default_rng(seed).normal(size=6)
        lap = prism.laplacian_matrix()
        assert quadratic_form(prism, x) == pytest.approx(float(x @ (lap @ x)), rel=1e-12, abs=1e-12)


class TestLaplacianSpectrumValues:
    """Known spectra."""

    def test_complete_graph(self, k5):
        spectrum = laplacian_spectrum(k5)
        assert spectrum.lambda1 == pytest.approx(5.0)
        assert np.allclose(spectrum.eigenvalues, [0, 5, 5, 5, 5], atol=1e-10)

    def test_cycle(self, c4):
        assert np.allclose(laplacian_spectrum(c4).eigenvalues, [0, 2, 2, 4], atol=1e-10)

    def test_prism(self, prism):
        assert laplacian_spectrum(prism).lambda1 == pytest.approx(2.0)

    def test_fiedler_vector(self, prism):
        spectrum = laplacian_spectrum(prism)
        x = spectrum.fiedler_vector
        assert abs(x.sum()) < 1e-10
        assert np.linalg.norm(x) == pytest.approx(1.0)
        assert quadratic_form(prism, x) == pytest.approx(spectrum.lambda1)


class TestLaplacianSpectrumProperties:
    """Identities that hold for every connected regular graph."""

    @pytest.mark.parametrize("seed", GRAPH_SEEDS)
    def test_trace(self, seed):
        g = sampled_graph(seed)
        nk = g.n_vertices * g.degree
        assert abs(laplacian_spectrum(g).eigenvalues.sum() - nk) <= 1e-9 * nk

    @pytest.mark.parametrize("seed", GRAPH_SEEDS)
    def test_lambda1_below_average(self, seed):
        g = sampled_graph(seed)
        n = g.n_vertices
        assert laplacian_spectrum(g).lambda1 <= n * g.degree / (n - 1) + 1e-9

    @pytest.mark.parametrize("seed", GRAPH_SEEDS)
    def test_zero_mode_is_constant(self, seed):
        g = sampled_graph(seed)
        spectrum = laplacian_spectrum(g)
        assert abs(spectrum.eigenvalues[0]) < 1e-9
        assert np.allclose(spectrum.zero_mode, 1.0 / np.sqrt(g.n_vertices), atol=1e-9)
        assert np.abs(g.laplacian_matrix() @ spectrum.zero_mode).max() < 1e-9

    @pytest.mark.parametrize("seed", GRAPH_SEEDS)
    def test_rayleigh_principle(self, seed):
        g = sampled_graph(seed)
        spectrum = laplacian_spectrum(g)
        rng = np.random.default_rng(1000 + seed)
        for _ in range(100):
            x = rng.normal(size=g.n_vertices)
            x -= x.mean()
            assert quadratic_form(g, x) / np.dot(x, x) >= spectrum.lambda1 - 1e-9
        fiedler = spectrum.fiedler_vector
        assert quadratic_form(g, fiedler) == pytest.approx(spectrum.lambda1, rel=1e-9)


class TestExpanderSampling:
    def test_sampled_graph_is_expander(self):
        g = sample_expander(16, 4, 0.2, seed=7)
        assert g.n_vertices == 16
        assert all(len(nbrs) == 4 for nbrs in g.adjacency)
        assert is_connected(g)
        assert laplacian_spectrum(g).lambda1 >= 0.2

    def test_same_seed_same_graph(self):
        assert sample_expander(12, 3, 0.2, seed=11).edges == sample_expander(12, 3, 0.2, seed=11).edges

    def test_family_order_independent(self):
        forward = generate_expander_family([8, 12], 4, 0.2, seed=3)
        backward = generate_expander_family([12, 8], 4, 0.2, seed=3)
        assert forward[0].edges == backward[1].edges
        assert forward[1].edges == backward[0].edges

    def test_family_parallel_matches_serial(self):
        serial = generate_expander_family([8, 10, 12], 4, 0.2, seed=5)
        parallel = generate_expander_family([8, 10, 12], 4, 0.2, seed=5, jobs=3)
        assert [g.edges for g in serial] == [g.edges for g in parallel]

    def test_unreachable_gap(self):
        with pytest.raises(SamplingExhausted):
            sample_expander(8, 4, 100.0, seed=1, max_attempts=20)

    def test_odd_product_rejected(self):
        with pytest.raises(InvalidParams):
            generate_expander_family([7], 3, 0.2, seed=1)

    def test_too_few_vertices(self):
        with pytest.raises(InvalidParams):
            generate_expander_family([4], 4, 0.2, seed=1)


class TestGraphFile:
    def test_format(self, c4):
        assert format_graph(c4) == "4 2\n0 1\n0 3\n1 2\n2 3\n"

    def test_file_round_trip(self, tmp_path, prism):
        path = tmp_path / "g.txt"
        write_graph(prism, path)
        assert read_graph(path).edges == prism.edges

    def test_bad_header(self):
        with pytest.raises(GraphFormatError):
            parse_graph("4\n0 1\n")

    def test_bad_edge_line(self):
        with pytest.raises(GraphFormatError):
            parse_graph("4 2\n0 1 2\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(GraphFormatError):
            read_graph(tmp_path / "absent.txt")
