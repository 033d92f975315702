"""
Tests for the external clustering metrics.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvnmf.errors import InputError
from mvnmf.evaluation.clustering import (
    MetricsReport,
    evaluate,
    matched_accuracy,
    nmi,
    rand_and_mirkin,
)


def brute_accuracy(truth, pred):
    classes = sorted(set(truth))
    clusters = sorted(set(pred))
    size = max(len(classes), len(clusters))
    best = 0
    for perm in itertools.permutations(range(size)):
        mapping = {c: perm[i] for i, c in enumerate(clusters)}
        hits = sum(1 for t, p in zip(truth, pred) if classes.index(t) == mapping[p])
        best = max(best, hits)
    return best / len(truth)


def brute_rand(truth, pred):
    pairs = list(itertools.combinations(range(len(truth)), 2))
    agree = sum(1 for i, j in pairs if (truth[i] == truth[j]) == (pred[i] == pred[j]))
    return agree / len(pairs)


def brute_nmi(truth, pred):
    n = len(truth)
    counts = {}
    for t, p in zip(truth, pred):
        counts[(t, p)] = counts.get((t, p), 0) + 1
    rows = {t: truth.count(t) for t in set(truth)}
    cols = {p: pred.count(p) for p in set(pred)}
    h_u = -sum(c / n * math.log(c / n) for c in rows.values())
    h_v = -sum(c / n * math.log(c / n) for c in cols.values())
    if h_u == 0 and h_v == 0:
        return 1.0
    if h_u == 0 or h_v == 0:
        return 0.0
    mi = sum(c / n * math.log(c * n / (rows[t] * cols[p])) for (t, p), c in counts.items())
    return mi / math.sqrt(h_u * h_v)


def set_partitions(n, k):
    """Every partition of n samples into at most k blocks, as restricted growth strings."""

    def grow(prefix, top):
        if len(prefix) == n:
            yield list(prefix)
            return
        for label in range(min(top + 2, k)):
            yield from grow(prefix + [label], max(top, label))

    yield from grow([0], 0)


def check_against_oracles(truth, pred):
    assert abs(matched_accuracy(truth, pred) - brute_accuracy(truth, pred)) <= 1e-12
    assert abs(nmi(truth, pred) - brute_nmi(truth, pred)) <= 1e-12
    ri, mirkin = rand_and_mirkin(truth, pred)
    assert abs(ri - brute_rand(truth, pred)) <= 1e-12
    assert mirkin == 1.0 - ri


class TestMatchedAccuracy:
    """Tests for Hungarian-matched accuracy."""

    def test_permuted_labels(self):
        """Test a relabelled perfect prediction scores 1."""
        assert matched_accuracy([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_crossed_partition(self):
        """Test the crossed 2 x 2 partition scores 0.5."""
        assert matched_accuracy([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5

    def test_single_predicted_cluster(self):
        """Test a one-cluster prediction against balanced classes scores 0.5."""
        assert matched_accuracy([0, 0, 1, 1], [0, 0, 0, 0]) == 0.5

    def test_more_clusters_than_classes(self):
        """Test rectangular tables are padded."""
        assert matched_accuracy([0, 0, 1, 1], [0, 1, 2, 2]) == 0.75

    def test_length_mismatch(self):
        """Test vectors of different lengths are rejected."""
        with pytest.raises(InputError, match="length"):
            matched_accuracy([0, 1], [0, 1, 1])

    def test_empty(self):
        """Test an empty labelling is rejected."""
        with pytest.raises(InputError):
            matched_accuracy([], [])

    def test_balanced_lower_bound(self, rng):
        """Test accuracy >= 1/k for balanced classes."""
        truth = np.repeat(np.arange(3), 5)
        for _ in range(50):
            assert matched_accuracy(truth, rng.integers(0, 3, size=15)) >= 1.0 / 3.0


class TestNmi:
    """Tests for normalized mutual information."""

    def test_identical(self):
        """Test identical partitions score 1."""
        assert nmi([0, 0, 1, 2], [0, 0, 1, 2]) == pytest.approx(1.0)

    def test_relabelled(self):
        """Test [0, 1] against [1, 0] scores 1."""
        assert nmi([0, 1], [1, 0]) == pytest.approx(1.0)

    def test_independent(self):
        """Test independent partitions score 0."""
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)

    def test_both_trivial(self):
        """Test two single-cluster partitions score 1."""
        assert nmi([0, 0, 0], [4, 4, 4]) == 1.0

    def test_one_trivial(self):
        """Test exactly one single-cluster partition scores 0."""
        assert nmi([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0
        assert nmi([0, 1, 0, 1], [2, 2, 2, 2]) == 0.0


class TestRandAndMirkin:
    """Tests for the pair-counting indices."""

    def test_identical(self):
        """Test identical partitions give (1, 0)."""
        assert rand_and_mirkin([0, 1, 1, 2], [0, 1, 1, 2]) == (1.0, 0.0)

    def test_crossed_partition(self):
        """Test the crossed partition gives (1/3, 2/3)."""
        ri, mirkin = rand_and_mirkin([0, 0, 1, 1], [0, 1, 0, 1])

        assert ri == pytest.approx(1.0 / 3.0)
        assert mirkin == pytest.approx(2.0 / 3.0)

    def test_permuted(self):
        """Test label permutations do not matter."""
        assert rand_and_mirkin([0, 0, 1, 2], [2, 2, 0, 1]) == (1.0, 0.0)

    def test_needs_two_samples(self):
        """Test n < 2 is rejected."""
        with pytest.raises(InputError):
            rand_and_mirkin([0], [0])


@pytest.mark.parametrize("n", range(2, 7))
def test_exhaustive_oracles(n):
    """Test every pair of partitions into at most 3 blocks against brute-force oracles."""
    for truth in set_partitions(n, 3):
        for pred in set_partitions(n, 3):
            check_against_oracles(truth, pred)


@pytest.mark.slow
@pytest.mark.parametrize("n", [7, 8])
def test_exhaustive_oracles_large_n(n):
    """Test n = 7, 8: every truth partition against a seeded sample of predictions (slow)."""
    rng = np.random.default_rng(n)
    candidates = list(set_partitions(n, 3))
    sample = [candidates[i] for i in rng.choice(len(candidates), size=150, replace=False)]
    for truth in candidates:
        for pred in sample:
            check_against_oracles(truth, pred)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 3), min_size=2, max_size=20).flatmap(
        lambda truth: st.tuples(
            st.just(truth),
            st.lists(st.integers(0, 3), min_size=len(truth), max_size=len(truth)),
            st.permutations(range(4)),
            st.permutations(range(4)),
        )
    )
)
def test_relabeling_invariance(case):
    """Test every metric ignores the names of the labels."""
    truth, pred, perm_t, perm_p = case
    truth, pred = np.array(truth), np.array(pred)
    relabelled_truth = np.array(perm_t)[truth]
    relabelled_pred = np.array(perm_p)[pred]

    original = evaluate(truth, pred)
    relabelled = evaluate(relabelled_truth, relabelled_pred)

    assert relabelled.accuracy == pytest.approx(original.accuracy, abs=1e-12)
    assert relabelled.nmi == pytest.approx(original.nmi, abs=1e-12)
    assert relabelled.rand_index == pytest.approx(original.rand_index, abs=1e-12)


class TestMetricsReport:
    """Tests for the report model."""

    def test_evaluate(self):
        """Test a perfect prediction and the percentage layout."""
        report = evaluate([0, 0, 1, 1], [1, 1, 0, 0])

        assert report.n == 4
        assert report.mirkin_index == 1.0 - report.rand_index
        assert report.as_percentages() == {"Acc": 100.0, "NMI": pytest.approx(100.0), "RI": 100.0, "MI": 0.0}

    def test_rejects_inconsistent_mirkin(self):
        """Test Mirkin must be the complement of Rand."""
        with pytest.raises(ValueError):
            MetricsReport(accuracy=1.0, nmi=1.0, rand_index=0.9, mirkin_index=0.2, n=4)

    def test_rejects_out_of_range(self):
        """Test scores outside [0, 1] are rejected."""
        with pytest.raises(ValueError):
            MetricsReport(accuracy=1.5, nmi=1.0, rand_index=1.0, mirkin_index=0.0, n=4)
