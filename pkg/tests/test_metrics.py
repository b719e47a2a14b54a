import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mstseed.errors import ConfigError, ContractError, DomainError
from mstseed.metrics import (
    MetricKind,
    distance,
    max_pairwise,
    normalize,
    pairwise_matrix,
)

from oracles import ref_distance, ref_matrix

KINDS = [MetricKind("euclidean"), MetricKind("sam"), MetricKind("kl"), MetricKind("renyi")]

positive_vectors = st.integers(1, 12).flatmap(
    lambda L: st.tuples(
        hnp.arrays(np.float64, L, elements=st.floats(1e-3, 1e3)),
        hnp.arrays(np.float64, L, elements=st.floats(1e-3, 1e3)),
    )
)


def test_metric_kind_defaults_and_aliases():
    assert MetricKind("renyi").alpha == 0.5
    assert MetricKind("renyi_sym", 0.3).alpha == 0.3
    assert MetricKind("kullback_leibler_sym").tag == "kl"
    assert MetricKind.parse("sam", 0.3).alpha is None


@pytest.mark.parametrize("args", [("renyi", 1.5), ("renyi", 0.0), ("renyi", 1.0), ("kl", 0.5), ("cosine", None)])
def test_metric_kind_rejects(args):
    with pytest.raises(ConfigError):
        MetricKind(*args)


def test_normalize_examples():
    np.testing.assert_allclose(normalize([2, 6]), [0.25, 0.75])
    np.testing.assert_allclose(normalize([1, 1, 1, 1]), [0.25] * 4)
    with pytest.raises(DomainError):
        normalize([0, 0])
    with pytest.raises(DomainError, match="vector 0"):
        normalize([1, -1])


def test_distance_examples():
    assert distance([0, 0, 0], [1, 2, 2]) == 3.0
    assert distance([1, 0], [1, 1], MetricKind("sam")) == pytest.approx(math.pi / 4, abs=1e-15)
    assert distance([1, 1], [1, 3], MetricKind("kl")) == pytest.approx(0.25 * math.log(3), rel=1e-14)
    assert distance([1, 1], [1, 3], MetricKind("kl")) == pytest.approx(0.2746530721670274, rel=1e-14)
    expected = -4 * math.log(math.sqrt(0.125) + math.sqrt(0.375))
    assert distance([1, 1], [1, 3], MetricKind("renyi")) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.138673, abs=1e-6)


def test_dimension_mismatch():
    with pytest.raises(ContractError):
        distance([1, 2], [1, 2, 3])


def test_kl_one_sided_zero_is_infinite():
    assert distance([1, 0], [1, 1], MetricKind("kl")) == math.inf
    assert distance([1, 0], [2, 0], MetricKind("kl")) == 0.0


def test_infinite_pairs_replaced_in_matrix():
    X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 3.0]])
    M = pairwise_matrix(X, MetricKind("kl"))
    finite = distance(X[1], X[2], MetricKind("kl"))
    assert M[0, 1] == M[0, 2] == 1.0 + finite
    assert max_pairwise(X, MetricKind("kl")) == 1.0 + finite


def test_matrix_small_examples():
    np.testing.assert_array_equal(pairwise_matrix(np.ones((2, 3))), np.zeros((2, 2)))
    M = pairwise_matrix(np.array([[0.0], [1.0], [2.0]]))
    assert sorted(M[np.triu_indices(3, 1)]) == [1.0, 1.0, 2.0]


@pytest.mark.parametrize("m", KINDS, ids=str)
def test_matrix_symmetric_and_matches_oracle(m):
    X = np.random.default_rng(3).uniform(0.01, 1.0, (50, 4))
    M = pairwise_matrix(X, m)
    assert np.max(np.abs(M - M.T)) == 0.0
    assert np.all(np.diag(M) == 0.0)
    R = ref_matrix(X[:12], m.tag, m.alpha or 0.5)
    np.testing.assert_allclose(M[:12, :12], R, rtol=1e-10, atol=1e-12)
    for i, j in [(0, 1), (7, 33), (49, 2)]:
        assert M[i, j] == distance(X[i], X[j], m)


@settings(max_examples=200, deadline=None)
@given(positive_vectors, st.sampled_from(KINDS))
def test_symmetric_nonnegative(pair, m):
    x, y = pair
    d = distance(x, y, m)
    assert d >= 0.0
    assert d == distance(y, x, m)


@settings(max_examples=200, deadline=None)
@given(positive_vectors, st.sampled_from(KINDS))
def test_identity(pair, m):
    x, _ = pair
    assert distance(x, x, m) == 0.0


@settings(max_examples=200, deadline=None)
@given(positive_vectors, st.floats(1e-3, 1e3), st.sampled_from(KINDS[2:]))
def test_divergence_scale_invariance(pair, c, m):
    x, y = pair
    assert distance(x, c * x, m) == pytest.approx(0.0, abs=1e-12)
    assert distance(x, y, m) == pytest.approx(distance(c * x, y, m), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(positive_vectors)
def test_sam_scale_invariance(pair):
    x, y = pair
    m = MetricKind("sam")
    assert distance(x, y, m) == pytest.approx(distance(7.5 * x, y, m), abs=1e-12)
    assert 0.0 <= distance(x, y, m) <= math.pi / 2 + 1e-12


@settings(max_examples=100, deadline=None)
@given(positive_vectors)
def test_renyi_half_is_bhattacharyya(pair):
    x, y = pair
    p, q = x / x.sum(), y / y.sum()
    bc = math.fsum(np.sqrt(p * q))
    assert distance(x, y, MetricKind("renyi")) == pytest.approx(-4 * math.log(bc) if bc < 1 else 0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(positive_vectors)
def test_renyi_tends_to_kl(pair):
    x, y = pair
    kl = distance(x, y, MetricKind("kl"))
    assume(kl > 1e-6)
    r = distance(x, y, MetricKind("renyi", 1 - 1e-4))
    assert abs(r - kl) <= 0.01 * kl


@settings(max_examples=60, deadline=None)
@given(positive_vectors, st.sampled_from(KINDS))
def test_agrees_with_scalar_oracle(pair, m):
    x, y = pair
    assert distance(x, y, m) == pytest.approx(ref_distance(x, y, m.tag, m.alpha or 0.5), rel=1e-9, abs=1e-9)


def test_negative_input_names_vector():
    X = np.array([[1.0, 2.0], [1.0, -2.0]])
    with pytest.raises(DomainError, match="vector 1"):
        pairwise_matrix(X, MetricKind("kl"))
