import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mstseed.errors import ContractError
from mstseed.metrics import MetricKind, pair_count, pairwise_matrix
from mstseed.nn_index import (
    SMALL,
    SPLIT,
    TERMINAL,
    IndexParams,
    SpatialIndex,
    build_index,
    connect_components,
    min_leaf_size,
    nn_mst,
)
from mstseed.prim import prim

from oracles import mp_leaf_size


def test_min_leaf_size_examples():
    assert min_leaf_size(2, 0.05) == 6
    assert min_leaf_size(1, 0.3173) == 2
    assert min_leaf_size(3, 1 - 1e-12) == 1


@pytest.mark.parametrize("L", range(1, 11))
@pytest.mark.parametrize("eps", [0.01, 0.05, 0.2])
def test_min_leaf_size_matches_high_precision(L, eps):
    assert min_leaf_size(L, eps) == mp_leaf_size(L, eps)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.floats(1e-4, 0.999), st.floats(1e-4, 0.999))
def test_min_leaf_size_monotone(L, e1, e2):
    lo, hi = sorted((e1, e2))
    assert min_leaf_size(L, hi) <= min_leaf_size(L, lo)
    assert min_leaf_size(L, lo) <= min_leaf_size(L + 1, lo)


def test_min_leaf_size_rejects():
    with pytest.raises(ContractError):
        min_leaf_size(0, 0.1)
    with pytest.raises(ContractError):
        min_leaf_size(2, 1.0)


def eight_on_a_line():
    X = np.arange(8, dtype=float)[:, None]
    return SpatialIndex(X, IndexParams(epsilon_conf=0.1, target_leaf_occupancy=2))


def test_eight_points_hand_trace():
    idx = eight_on_a_line()
    assert idx.n_min == 3
    root = idx.nodes[0]
    assert root.status == SPLIT and root.split_threshold == 3.5
    depth1 = [idx.nodes[c] for c in root.child]
    assert [n.card for n in depth1] == [4, 4]
    assert all(n.status == SPLIT for n in depth1)
    leaves = [idx.nodes[k] for k in idx.leaves]
    assert [n.card for n in leaves] == [2, 2, 2, 2]
    assert all(n.status == SMALL and n.depth == 2 for n in leaves)
    idx.check()


def test_interior_cell_touches_only_its_neighbours():
    idx = eight_on_a_line()
    order = sorted(idx.leaves.tolist(), key=lambda k: idx.nodes[k].lower[0])
    second = order[1]
    assert sorted(idx.neighbor_cells(second).tolist()) == sorted(order[:3])
    np.testing.assert_array_equal(idx.candidate_neighbors(2), [0, 1, 3, 4, 5])


def test_two_cells_are_adjacent():
    X = np.array([[0.0], [0.2], [0.4], [0.6], [0.8], [1.0]])
    idx = SpatialIndex(X, IndexParams(epsilon_conf=0.5, target_leaf_occupancy=3))
    assert len(idx.leaves) == 2
    assert idx.candidates_for([0.1]).tolist() == list(range(6))


def test_identical_points_single_terminal():
    idx = SpatialIndex(np.ones((50, 2)), IndexParams(target_leaf_occupancy=4))
    assert len(idx.nodes) == 1 and idx.nodes[0].status == TERMINAL


def test_too_few_points_single_small_node():
    idx = SpatialIndex(np.random.default_rng(0).random((4, 2)), IndexParams(target_leaf_occupancy=2))
    assert len(idx.nodes) == 1 and idx.nodes[0].status == SMALL


def test_single_cell_candidates_are_everyone_else():
    X = np.random.default_rng(1).random((10, 2))
    idx = SpatialIndex(X)
    assert idx.candidate_neighbors(3).tolist() == [0, 1, 2, 4, 5, 6, 7, 8, 9]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 600), st.integers(1, 4), st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_structure_invariants(n, L, M, seed):
    X = np.random.default_rng(seed).normal(size=(n, L)).round(1)
    idx = SpatialIndex(X, IndexParams(target_leaf_occupancy=M, sample_size=64, seed=seed))
    idx.check()
    for i in range(0, n, max(1, n // 10)):
        assert idx.locate(X[i]) == idx.leaf_of[i]


def test_descriptor_table_csv(tmp_path):
    idx = eight_on_a_line()
    idx.to_csv(tmp_path / "index.csv")
    lines = (tmp_path / "index.csv").read_text().splitlines()
    assert lines[0].startswith("node,output_0,status,parent,child_1,child_2,depth,card")
    assert len(lines) == 1 + len(idx.nodes)


def test_single_cell_nn_mst_equals_exact():
    X = np.random.default_rng(2).normal(size=(25, 2))
    res = nn_mst(X)
    assert len(res.index.leaves) == 1
    assert res.descriptor == prim(pairwise_matrix(X))
    assert res.evaluations == pair_count(25)


def test_two_blobs_same_length_as_exact():
    rng = np.random.default_rng(4)
    X = np.concatenate([rng.normal(0, 1, 60), rng.normal(50, 1, 60)])[:, None]
    res = nn_mst(X, params=IndexParams(target_leaf_occupancy=16))
    exact = prim(pairwise_matrix(X))
    assert len(res.index.leaves) >= 4
    assert res.descriptor.total_length == pytest.approx(exact.total_length, rel=1e-12)


def test_uniform_budget():
    X = np.random.default_rng(5).random((1000, 2))
    res = nn_mst(X)
    assert res.evaluations < 0.2 * 1000 * 999 / 2
    sizes = [res.index.nodes[k].card for k in res.index.leaves]
    assert 16 <= np.mean(sizes) <= 32


@settings(max_examples=15, deadline=None)
@given(st.integers(50, 400), st.integers(0, 2**32 - 1), st.integers(4, 40))
def test_never_shorter_than_exact(n, seed, M):
    X = np.random.default_rng(seed).normal(size=(n, 2))
    approx = nn_mst(X, params=IndexParams(target_leaf_occupancy=M)).descriptor.total_length
    exact = prim(pairwise_matrix(X)).total_length
    assert approx >= exact * (1 - 1e-12)


def test_connect_components_joins_closest_means():
    E = np.array([[0.0, 0], [1, 0], [10, 0], [11, 0], [30, 0], [31, 0]])
    rows, cols, ws = np.array([0, 2, 4]), np.array([1, 3, 5]), np.ones(3)
    er, ec, ew, evals, n_comp = connect_components(E, rows, cols, ws, MetricKind())
    assert n_comp == 3
    assert sorted(zip(er, ec)) == [(1, 2), (3, 4)]
    assert sorted(ew) == [9.0, 19.0]
    assert evals > 0


def test_nn_mst_divergence_metric():
    X = np.random.default_rng(6).uniform(0.1, 1.0, (300, 3))
    res = nn_mst(X, MetricKind("kl"), IndexParams(target_leaf_occupancy=16))
    exact = prim(pairwise_matrix(X, MetricKind("kl")))
    assert res.descriptor.total_length >= exact.total_length * (1 - 1e-12)
    assert build_index(X, m=MetricKind("kl")).points.sum(axis=1) == pytest.approx(np.ones(300))
