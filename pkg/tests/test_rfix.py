import numpy as np
import pytest

from ngfix import GraphIndex, RFixStatus, exact_knn, greedy_search, rfix, rfix_once
from ngfix.graph import INF_TAG
from ngfix.hardness import delaunay_defect_instance

from conftest import graph_from_lists


def _split_line():
    # 0-1-2 and 10-11 are two components; medoid is 2
    return graph_from_lists([[0], [1], [2], [10], [11]], [[1], [0, 2], [1], [4], [3]])


def test_reaches_vicinity_already():
    G = _split_line()
    knn = exact_knn(G.store, [1.2], 5)
    step = rfix_once(G, [1.2], knn, 2, brute_force=True)
    assert step.status is RFixStatus.UNNECESSARY and step.edges == 0
    out = rfix(G, [1.2], knn, 2)
    assert out.iterations == 0 and out.status is RFixStatus.UNNECESSARY


def test_bridges_disconnected_component():
    G = _split_line()
    assert G.entry == 2
    knn = exact_knn(G.store, [12.0], 5)
    assert greedy_search(G, [12.0], 1, L=2).ids.tolist() == [2]
    step = rfix_once(G, [12.0], knn, 2, brute_force=True)
    assert step.status is RFixStatus.FIXED and step.anchor == 2
    assert G.extra_neighbors(2) == [(3, INF_TAG)]
    assert greedy_search(G, [12.0], 1, L=2).ids.tolist() == [4]
    assert rfix_once(G, [12.0], knn, 2, brute_force=True).status is RFixStatus.UNNECESSARY


def test_probe_surrogate_cannot_see_other_component():
    G = _split_line()
    knn = exact_knn(G.store, [12.0], 5)
    step = rfix_once(G, [12.0], knn, 2)
    assert step.status is RFixStatus.CAPPED and step.edges == 0


def test_kept_candidates_satisfy_rng_rule():
    # isolated anchor at the origin; three points all closer to q than it
    pts = [[0.0, 0.0], [-0.25, 0.3], [0.25, 0.3], [0.0, 0.55]]
    G = graph_from_lists(pts, [[] for _ in pts], entry=0)
    q = np.array([0.0, 0.3])
    rfix_once(G, q, exact_knn(G.store, q, 4), 1, brute_force=True)
    kept = [v for v, _ in G.extra_neighbors(0)]
    assert kept == [1, 2]
    d = lambda a, b: float(np.sum((G.store.data[a].astype(np.float64) - G.store.data[b]) ** 2))  # noqa: E731
    for i, v in enumerate(kept):
        for r in kept[:i]:
            assert d(v, r) > d(0, v)


def test_capped_when_degree_full():
    G = _split_line()
    G.set_extra_cap(1)
    G.add_extra_edge(2, 0, INF_TAG)
    knn = exact_knn(G.store, [12.0], 5)
    out = rfix(G, [12.0], knn, 2, brute_force=True)
    assert out.status is RFixStatus.CAPPED and out.edges == 0


def test_max_iters_precondition():
    G = _split_line()
    with pytest.raises(ValueError):
        rfix(G, [12.0], exact_knn(G.store, [12.0], 5), 2, max_iters=0)


def test_delaunay_defect_probe_post_condition():
    pts = np.random.default_rng(4).random((120, 2))
    adj, u, v, q = delaunay_defect_instance(pts, seed=2)
    G = graph_from_lists(pts, adj)
    n_q = 3
    knn = exact_knn(G.store, q, 20)
    out = rfix(G, q, knn, n_q, brute_force=True, max_iters=100)
    res = greedy_search(G, q, 1, L=n_q)
    assert out.status is RFixStatus.CAPPED or res.dists[0] <= knn.dists[n_q - 1]


def test_rfix_edges_leave_only_anchor():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(200, 3))
    G = graph_from_lists(pts, [[(u + 1) % 200] for u in range(200)])
    before = G.to_bytes()
    q = rng.normal(size=3)
    step = rfix_once(G, q, exact_knn(G.store, q, 10), 10, brute_force=True)
    changed = [v for v in range(200) if G.extra_neighbors(v)]
    if step.edges:
        assert changed == [step.anchor]
    else:
        assert G.to_bytes() == before
    assert isinstance(GraphIndex.from_bytes(G.to_bytes()), GraphIndex)
