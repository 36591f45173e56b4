"""Randomized checks of the reachability, hardness and repair guarantees.

Each property draws small random instances from a per-trial seed. A failing
instance is shrunk (edges dropped while it keeps failing) where the
instance is a plain digraph, and reported with the seed that rebuilds it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .builder import BaseBuildConfig, build_base
from .core import VectorStore
from .fixing import FixConfig, fix_workload, ngfix
from .graph import GraphIndex
from .hardness import (INF_EH, NeighboringGraph, brute_force_matrix, compute_hardness,
                       minimax_path_eh, neighboring_graph, reachable_matrix, _reaches)
from .search import greedy_search
from .workload import QuerySet, exact_knn

PROPERTIES = ("T1", "C1", "T3", "T4", "T5")


@dataclass
class Failure:
    prop: str
    trial_seed: int
    message: str
    reproduction: dict = field(default_factory=dict)


@dataclass
class PropertyResult:
    passed: int = 0
    failed: int = 0
    failures: list[Failure] = field(default_factory=list)


@dataclass
class PropertyReport:
    seed: int
    trials: int
    results: dict[str, PropertyResult] = field(default_factory=dict)

    @property
    def all_green(self) -> bool:
        return all(r.failed == 0 for r in self.results.values())

    def summary(self) -> str:
        return "\n".join(f"{name}: {r.passed} passed, {r.failed} failed"
                         for name, r in self.results.items())


# -- instance generators --------------------------------------------------------


def _random_points(rng, n_max: int = 200, d_max: int = 16):
    n = int(rng.integers(5, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    if rng.random() < 0.2:
        # coarse integer grid: plenty of distance ties and duplicates
        data = rng.integers(-3, 4, size=(n, d)).astype(np.float32)
    else:
        data = rng.normal(size=(n, d)).astype(np.float32)
    return data


def _random_edges(rng, n: int, max_deg: int = 6) -> list[list[int]]:
    adj = []
    for u in range(n):
        k = int(rng.integers(0, min(max_deg, n - 1) + 1))
        others = rng.choice(n - 1, size=k, replace=False)
        adj.append([int(v + (v >= u)) for v in others])
    return adj


def _graph_from_edges(store: VectorStore, adj: list[list[int]], m_ex=None) -> GraphIndex:
    G = GraphIndex(store, m_base=max(1, max((len(a) for a in adj), default=1)), m_ex=m_ex)
    for u, vs in enumerate(adj):
        G.set_base_neighbors(u, vs)
    G.refresh_entry()
    return G


def _random_instance(rng):
    """Store, graph (random digraph or built base graph), edge lists and query."""
    data = _random_points(rng)
    store = VectorStore(data)
    n = store.count
    if rng.random() < 0.5:
        adj = _random_edges(rng, n)
        G = _graph_from_edges(store, adj)
    else:
        M = int(rng.integers(2, 9))
        G = build_base(store, BaseBuildConfig(M=M, efC=int(rng.integers(M, 4 * M + 1)), m_ex=None))
        adj = [G.base_neighbors(u).tolist() for u in range(n)]
    q = (data[rng.integers(n)] + rng.normal(scale=0.5, size=data.shape[1])).astype(np.float32)
    return store, G, adj, q


def _shrink(adj: list[list[int]], fails: Callable[[list[list[int]]], bool]) -> list[list[int]]:
    """Greedily drop out-lists, then single edges, while ``fails`` still holds."""
    adj = [list(a) for a in adj]
    for u in range(len(adj)):
        if adj[u]:
            trial = [list(a) for a in adj]
            trial[u] = []
            if fails(trial):
                adj = trial
    changed = True
    while changed:
        changed = False
        for u in range(len(adj)):
            for v in list(adj[u]):
                trial = [list(a) for a in adj]
                trial[u].remove(v)
                if fails(trial):
                    adj = trial
                    changed = True
    return adj


# -- properties ---------------------------------------------------------------------


def _check_t1(store, adj, q, S, sources) -> str | None:
    G = _graph_from_edges(store, adj)
    knn = exact_knn(store, q, store.count)
    ng = neighboring_graph(G, q, S, knn)
    for i in sources:
        res = greedy_search(G, q, 1, int(ng.ids[i]), S, capture_visited=True)
        seen = set(res.visited.tolist())
        for j in range(S):
            if _reaches(ng.adj, S, i, j) and int(ng.ids[j]) not in seen:
                return f"search from rank {i + 1} with L={S} missed rank {j + 1} reachable in NG_{S}"
    return None


def _check_c1(store, adj, q, S, pairs) -> str | None:
    G = _graph_from_edges(store, adj)
    knn = exact_knn(store, q, store.count)
    ng = neighboring_graph(G, q, S, knn)
    hm = compute_hardness(ng, S)
    for i, j in pairs:
        h = int(hm.H[i, j])
        if h == INF_EH:
            continue
        res = greedy_search(G, q, 1, int(ng.ids[i]), h, capture_visited=True)
        if int(ng.ids[j]) not in set(res.visited.tolist()):
            return f"search from rank {i + 1} with L=EH={h} missed rank {j + 1}"
    return None


def _check_t3(adj_mat: np.ndarray, n_q: int) -> str | None:
    ng = NeighboringGraph(np.arange(len(adj_mat)), adj_mat)
    H = compute_hardness(ng, n_q).H
    ref = brute_force_matrix(ng, n_q)
    if not np.array_equal(H, ref):
        i, j = np.argwhere(H != ref)[0]
        return f"H[{i + 1}][{j + 1}]={H[i, j]} but prefix-reachability gives {ref[i, j]}"
    for i in range(n_q):
        for j in range(n_q):
            m = minimax_path_eh(ng, i + 1, j + 1)
            if m != H[i, j]:
                return f"H[{i + 1}][{j + 1}]={H[i, j]} but the bottleneck path gives {m}"
    return None


def _check_t4(store, adj, q, n_q, max_s, k_h) -> str | None:
    G = _graph_from_edges(store, adj, m_ex=None)
    knn = exact_knn(store, q, max_s)
    ng = neighboring_graph(G, q, max_s, knn)
    hm = compute_hardness(ng, n_q)
    T = reachable_matrix(hm, k_h)
    cfg = FixConfig(n_q, k_h, max_s, None)
    added = ngfix(G, q, knn, cfg, hm, T.copy())
    if added > 2 * (n_q - 1):
        return f"ngfix added {added} edges > 2(N_q-1)={2 * (n_q - 1)}"
    after = compute_hardness(neighboring_graph(G, q, max_s, knn), n_q)
    bad = np.argwhere(after.H > k_h)
    if len(bad):
        i, j = bad[0]
        return f"after ngfix EH(rank {i + 1}, rank {j + 1})={after.H[i, j]} > K_h={k_h}"
    return None


def _check_t5(rng) -> tuple[str | None, dict]:
    n = int(rng.integers(30, 401))
    d = int(rng.integers(2, 17))
    centers = rng.normal(size=(3, d))
    data = (centers[rng.integers(3, size=n)] + 0.4 * rng.normal(size=(n, d))).astype(np.float32)
    store = VectorStore(data)
    M = int(rng.integers(2, 7))
    G = build_base(store, BaseBuildConfig(M=M, efC=max(M, 16), m_ex=None))
    n_hist = int(rng.integers(1, 7))
    shift = rng.normal(size=(n_hist, d))
    shift *= (rng.random((n_hist, 1)) < 0.5) * 1.5
    hist = (data[rng.integers(n, size=n_hist)] + shift).astype(np.float32)
    n_q = int(rng.integers(1, min(10, n) + 1))
    max_s = min(5 * n_q, n)
    qset = QuerySet(hist, exact_knn(store, hist, max_s))
    fix_workload(G, qset, [FixConfig(n_q, n_q, max_s, None)], rfix_brute_force=True,
                 rfix_max_iters=10_000, rfix_sweeps=10_000)
    params = dict(n=n, d=d, M=M, n_hist=n_hist, n_q=n_q, max_s=max_s)
    for qi, q in enumerate(hist):
        res = greedy_search(G, q, n_q, G.entry, n_q)
        want = set(qset.gt[qi].ids[:n_q].tolist())
        if set(res.ids.tolist()) != want:
            return f"historical query {qi} recall@{n_q} < 1 after fixing", params
    return None, params


def run_property_suite(seed: int = 1, trials: int = 100,
                       properties=PROPERTIES, keep_failures: int = 5) -> PropertyReport:
    """Run ``trials`` random instances of each selected property.

    Only the first failure of each property is shrunk; later ones keep
    their trial seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    unknown = set(properties) - set(PROPERTIES)
    if unknown:
        raise ValueError(f"unknown properties {sorted(unknown)}")
    report = PropertyReport(seed, trials, {p: PropertyResult() for p in properties})
    seeds = np.random.SeedSequence(seed).generate_state(trials * len(PROPERTIES), dtype=np.uint64)

    def record(name, ts, msg, repro):
        r = report.results[name]
        if msg is None:
            r.passed += 1
            return
        r.failed += 1
        if len(r.failures) < keep_failures:
            r.failures.append(Failure(name, ts, msg, repro))

    for t in range(trials):
        for p_idx, name in enumerate(PROPERTIES):
            if name not in properties:
                continue
            ts = int(seeds[t * len(PROPERTIES) + p_idx])
            rng = np.random.default_rng(ts)
            if name == "T3":
                S = int(rng.integers(1, 33))
                adj = rng.random((S, S)) < rng.uniform(0.02, 0.4)
                np.fill_diagonal(adj, False)
                n_q = int(rng.integers(1, S + 1))
                msg = _check_t3(adj, n_q)
                repro = {}
                if msg and not report.results[name].failures:
                    lists = [np.flatnonzero(row).tolist() for row in adj]

                    def to_mat(ls, S=S):
                        m = np.zeros((S, S), dtype=bool)
                        for u, vs in enumerate(ls):
                            m[u, vs] = True
                        return m

                    small = _shrink(lists, lambda ls: _check_t3(to_mat(ls), n_q) is not None)
                    repro = dict(S=S, n_q=n_q, edges=small)
                record(name, ts, msg, repro)
                continue
            if name == "T5":
                msg, params = _check_t5(rng)
                record(name, ts, msg, params if msg else {})
                continue

            store, G, adj, q = _random_instance(rng)
            n = store.count
            if name == "T1":
                S = int(rng.integers(1, n + 1))
                sources = rng.choice(S, size=min(S, 8), replace=False).tolist()
                check = lambda a: _check_t1(store, a, q, S, sources)  # noqa: E731
            elif name == "C1":
                S = int(rng.integers(1, min(n, 64) + 1))
                pairs = [tuple(int(x) for x in rng.integers(S, size=2)) for _ in range(16)]
                check = lambda a: _check_c1(store, a, q, S, pairs)  # noqa: E731
            else:
                n_q = int(rng.integers(1, min(n, 20) + 1))
                max_s = int(rng.integers(n_q, min(n, 5 * n_q) + 1))
                k_h = int(rng.integers(n_q, max_s + 1))
                check = lambda a: _check_t4(store, a, q, n_q, max_s, k_h)  # noqa: E731
            msg = check(adj)
            repro = {}
            if msg and not report.results[name].failures:
                small = _shrink(adj, lambda a: check(a) is not None)
                repro = dict(points=store.data.tolist(), query=q.tolist(), edges=small)
            record(name, ts, msg, repro)
    return report
