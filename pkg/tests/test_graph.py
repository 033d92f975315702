"""
Tests for the similarity graph and its Laplacian.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvnmf.errors import InputError
from mvnmf.numerics.graph import local_scale, median_pairwise_distance, similarity_graph


class TestMedianPairwiseDistance:
    """Tests for the median heuristic."""

    def test_median(self):
        """Test the median of the pairwise distances."""
        assert median_pairwise_distance(np.array([[0.0, 1.0, 5.0]])) == pytest.approx(4.0)

    def test_zero_median_falls_back(self):
        """Test identical samples give bandwidth 1."""
        assert median_pairwise_distance(np.ones((3, 4))) == 1.0

    def test_single_sample(self):
        """Test a single sample gives bandwidth 1."""
        assert median_pairwise_distance(np.ones((3, 1))) == 1.0


class TestLocalScale:
    """Tests for the nearest-neighbour bandwidth."""

    @pytest.mark.parametrize("neighbor,expected", [(1, 1.5), (2, 3.0), (7, 6.5)])
    def test_examples(self, neighbor, expected):
        """Test the median neighbour distance on the line 0, 1, 3, 7 (the order is capped at n - 1)."""
        assert local_scale(np.array([[0.0, 1.0, 3.0, 7.0]]), neighbor) == pytest.approx(expected)

    def test_identical_samples_fall_back(self):
        """Test vanishing neighbour distances fall back to the median heuristic."""
        assert local_scale(np.ones((2, 5))) == 1.0

    def test_single_sample(self):
        assert local_scale(np.ones((3, 1))) == 1.0


class TestSimilarityGraph:
    """Tests for similarity_graph."""

    def test_identical_columns(self):
        """Test zero distances give an all-ones W."""
        graph = similarity_graph(np.array([[2.0, 2.0], [1.0, 1.0]]))

        np.testing.assert_array_equal(graph.W, np.ones((2, 2)))
        np.testing.assert_array_equal(graph.L, np.array([[1.0, -1.0], [-1.0, 1.0]]))

    def test_scalar_example(self):
        """Test W(1, 2) = exp(-9 / 18) for sigma = 3."""
        graph = similarity_graph(np.array([[0.0, 3.0]]), sigma_w=3.0)

        assert graph.W[0, 1] == pytest.approx(0.60653, abs=1e-5)
        assert graph.sigma == 3.0

    def test_self_similarity_retained(self, rng):
        """Test W(i, i) = 1."""
        graph = similarity_graph(rng.standard_normal((3, 6)))
        np.testing.assert_array_equal(np.diag(graph.W), np.ones(6))

    def test_auto_bandwidth(self, rng):
        """Test 'auto' uses the median pairwise distance."""
        X = rng.standard_normal((3, 8))
        assert similarity_graph(X, "auto").sigma == pytest.approx(median_pairwise_distance(X))

    def test_local_bandwidth_separates_groups(self, rng):
        """Test 'local' disconnects two distant tight groups that 'auto' links."""
        X = np.hstack([0.1 * rng.standard_normal((2, 10)), 10.0 + 0.1 * rng.standard_normal((2, 10))])

        local = similarity_graph(X, "local")
        auto = similarity_graph(X, "auto")

        assert local.sigma == pytest.approx(local_scale(X))
        assert local.W[:10, 10:].max() < 1e-6
        assert auto.W[:10, 10:].min() > 0.1

    def test_too_few_samples(self):
        """Test n < 2 is an input error."""
        with pytest.raises(InputError):
            similarity_graph(np.array([[1.0], [2.0]]))

    def test_bad_bandwidth(self):
        """Test a non-positive bandwidth is an input error."""
        with pytest.raises(InputError):
            similarity_graph(np.eye(3), sigma_w=0.0)

    def test_quadratic_form(self, rng):
        """Test tr(G L G^T) against the explicit trace."""
        graph = similarity_graph(rng.standard_normal((2, 7)))
        G = rng.uniform(size=(3, 7))

        assert graph.quadratic_form(G) == pytest.approx(np.trace(G @ graph.L @ G.T))

    def test_spectral_radius_cached(self, rng):
        """Test sigma_max(L) matches the eigenvalues and is computed once."""
        graph = similarity_graph(rng.standard_normal((2, 10)))
        expected = np.abs(np.linalg.eigvalsh(graph.L)).max()

        assert graph.spectral_radius == pytest.approx(expected)
        assert "spectral_radius" in graph.__dict__


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 6), elements=st.floats(-5, 5, allow_nan=False)))
def test_laplacian_rows_sum_to_zero_and_psd(X):
    """Test L 1 = 0, symmetry and positive semidefiniteness."""
    graph = similarity_graph(X)

    np.testing.assert_allclose(graph.L.sum(axis=1), 0.0, atol=1e-10)
    np.testing.assert_array_equal(graph.L, graph.L.T)
    v = np.random.default_rng(0).standard_normal((100, 6))
    assert np.all(np.einsum("ij,jk,ik->i", v, graph.L, v) >= -1e-9)
