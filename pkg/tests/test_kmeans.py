import csv
import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from identlab._random import substream
from identlab.errors import TooFewPoints, TooLarge
from identlab.kmeans import (
    assign, brute_force_kmeans, lex_sort, lloyd, membership_consistency_experiment,
    misclassification_floor, objective, voronoi_assign,
)
from identlab.models import FixedClassSpec


def brute_oracle(X, k):
    """Minimum within-cluster sum of squares over all labelings, with plain loops."""
    X = np.asarray(X, float).reshape(len(X), -1)
    best = np.inf
    for labels in itertools.product(range(k), repeat=len(X)):
        w = 0.0
        for j in set(labels):
            pts = X[np.array(labels) == j]
            w += ((pts - pts.mean(axis=0)) ** 2).sum()
        best = min(best, w)
    return best


def test_three_point_example():
    X = [0.0, 1.0, 10.0]
    for fit in (lloyd(X, 2, stream=substream(0)), brute_force_kmeans(X, 2)):
        assert fit.centers.ravel().tolist() == [0.5, 10.0]
        assert fit.labels.tolist() == [0, 0, 1]
        assert fit.objective == pytest.approx(0.5)


def test_ties_go_to_lowest_index():
    assert voronoi_assign([1.0], [[0.0], [2.0]]) == 0
    labels, _ = assign([[1.0], [3.0]], [[0.0], [2.0], [4.0]])
    assert labels.tolist() == [0, 1]


def test_lex_sort_relabels():
    c, lab = lex_sort([[2.0, 0.0], [1.0, 5.0], [1.0, 3.0]], [0, 1, 2])
    assert c.tolist() == [[1.0, 3.0], [1.0, 5.0], [2.0, 0.0]]
    assert lab.tolist() == [2, 1, 0]


def test_errors():
    with pytest.raises(TooFewPoints):
        lloyd([1.0], 2)
    with pytest.raises(TooFewPoints):
        brute_force_kmeans([1.0], 2)
    with pytest.raises(TooLarge):
        brute_force_kmeans(np.arange(20.0), 3)
    with pytest.raises(ValueError):
        lloyd([np.nan, 1.0, 2.0], 2)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 7), p=st.integers(1, 2), k=st.integers(1, 3), seed=st.integers(0, 10**6))
def test_brute_force_matches_loop_oracle(n, p, k, seed):
    if k > n:
        return
    X = np.random.default_rng(seed).normal(size=(n, p)) * 3
    fit = brute_force_kmeans(X, k)
    assert fit.objective == pytest.approx(brute_oracle(X, k), rel=1e-9, abs=1e-9)
    assert fit.objective == pytest.approx(objective(X, fit.centers, fit.labels), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 60), k=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_lloyd_invariants(n, k, seed):
    if k > n:
        return
    X = np.random.default_rng(seed).normal(size=(n, 2))
    fit = lloyd(X, k, restarts=4, stream=substream(seed))
    h = np.array(fit.history)
    assert np.all(np.diff(h) <= 1e-9 * np.maximum(1, np.abs(h[:-1])))
    # lexicographic center order and nearest-center labels
    order = np.lexsort(fit.centers.T[::-1])
    assert order.tolist() == list(range(fit.k))
    labels, _ = assign(X, fit.centers)
    assert np.array_equal(labels, fit.labels)
    assert fit.objective == pytest.approx(objective(X, fit.centers, fit.labels))


def test_lloyd_deterministic_and_near_optimal():
    rng = substream(1)
    X = np.r_[rng.normal(-3, 1, (300, 2)), rng.normal(3, 1, (300, 2))]
    a = lloyd(X, 2, stream=substream(2))
    b = lloyd(X, 2, stream=substream(2))
    assert np.array_equal(a.centers, b.centers)
    assert np.allclose(np.abs(a.centers), 3, atol=0.3)


def test_misclassification_floor():
    assert misclassification_floor(2.0, 1.0) == pytest.approx(norm.cdf(-1.0), rel=1e-14)
    assert 1 - misclassification_floor(2.0, 1.0) == pytest.approx(0.841345, abs=1e-6)
    with pytest.raises(ValueError):
        misclassification_floor(1.0, 0.0)


def test_consistency_experiment_gaussian_floor():
    labels = np.arange(2000) % 2
    model = FixedClassSpec([[0.0], [2.0]], 1.0, labels)
    tab = membership_consistency_experiment(model, [2000], 400, substream(3), restarts=4)
    row = tab.rows[0]
    assert 0.8413 in row.ci and row.ci.upper < 1.0
    rows = list(csv.reader(io.StringIO(tab.to_csv())))
    assert rows[0] == ["n", "reps", "frac_correct", "ci_lo", "ci_hi"]


def test_consistency_experiment_separated_clusters():
    model = FixedClassSpec([[0.0], [20.0]], 1.0, np.arange(100) % 2)
    tab = membership_consistency_experiment(model, [10, 100], 50, substream(4), restarts=4)
    assert tab.fractions.tolist() == [1.0, 1.0]
