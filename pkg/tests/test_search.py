import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngfix import GraphIndex, VectorStore, exact_knn, greedy_search, range_collect
from ngfix.builder import BaseBuildConfig, build_base

from conftest import graph_from_lists


def test_single_vertex():
    G = graph_from_lists([[1.0]], [[]])
    res = greedy_search(G, [0.0], 1)
    assert res.ids.tolist() == [0] and res.ndc == 1


def test_chain_hand_trace():
    # values 1..5 at ids 0..4, edges 1->2->3->4->5->1
    G = graph_from_lists([[1], [2], [3], [4], [5]], [[1], [2], [3], [4], [0]])
    res = greedy_search(G, [0.0], 1, ep=4, L=2)
    assert res.ids.tolist() == [0]


def test_argument_errors():
    G = graph_from_lists([[0], [1]], [[1], [0]])
    with pytest.raises(ValueError):
        greedy_search(G, [0.0], 2, L=1)
    with pytest.raises(ValueError):
        greedy_search(G, [0.0], 0)
    with pytest.raises(ValueError):
        greedy_search(G, [0.0], 1, ep=7)
    G.tomb[1] = G.removed[1] = True
    with pytest.raises(ValueError, match="removed"):
        greedy_search(G, [0.0], 1, ep=1)


def test_empty_graph():
    G = GraphIndex(VectorStore(np.empty((0, 2))))
    assert len(greedy_search(G, [0.0, 0.0], 3).ids) == 0


def test_tombstones_traversed_not_returned():
    # 0 -> 1 -> 2 path; 1 deleted but still routes
    G = graph_from_lists([[0], [1], [2]], [[1], [2], []], entry=0)
    G.tomb[1] = True
    res = greedy_search(G, [1.0], 2, L=3, capture_visited=True)
    assert 1 not in res.ids.tolist()
    assert 1 in res.visited.tolist()
    assert res.ids.tolist() == [0, 2] or res.ids.tolist() == [2, 0]


@pytest.fixture(scope="module")
def built():
    rng = np.random.default_rng(5)
    store = VectorStore(rng.normal(size=(400, 6)))
    return build_base(store, BaseBuildConfig(M=8, efC=64))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 399))
def test_stored_vector_found_first(built, i):
    res = greedy_search(built, built.store.data[i], 1, L=64)
    assert res.ids[0] == i and res.dists[0] == 0


def test_large_L_matches_exact(built):
    q = np.random.default_rng(9).normal(size=6)
    res = greedy_search(built, q, 10, L=400)
    gt = exact_knn(built.store, q, 10)
    assert res.ids.tolist() == gt.ids.tolist()
    assert np.array_equal(res.dists, gt.dists)


def test_range_collect(built):
    q = np.random.default_rng(2).normal(size=6).astype(np.float32)
    assert len(range_collect(built, q, 0.0, 50)) == 0
    full = greedy_search(built, q, 1, L=50, capture_visited=True)
    inf = range_collect(built, q, np.inf, 50)
    assert sorted(inf.tolist()) == sorted(full.visited.tolist())
    r = float(np.median(full.visited_dists))
    got = set(range_collect(built, q, r, 50).tolist())
    truth = set(np.flatnonzero(built.store.distances_to(q) < r).tolist())
    assert got and got <= truth
