"""Neighboring graphs and the escape-hardness matrix.

Ranks are 1-based in every *value* (``H[i-1, j-1] == EH(N_i, N_j)``) and
0-based in array indices. ``INF_EH`` marks pairs that never connect within
the first ``max_s`` neighbors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import GraphIndex

INF_EH = int(K.INF_EH)


@dataclass
class NeighboringGraph:
    """Subgraph induced by the ``S`` nearest neighbors of a query, in rank order."""

    ids: np.ndarray
    adj: np.ndarray  # (S, S) bool, adj[a, b] <=> edge rank a+1 -> rank b+1

    @property
    def size(self) -> int:
        return len(self.ids)

    def rank_of(self) -> dict[int, int]:
        return {int(v): r + 1 for r, v in enumerate(self.ids)}

    def prefix(self, S: int) -> "NeighboringGraph":
        return NeighboringGraph(self.ids[:S], self.adj[:S, :S])


@dataclass
class HardnessMatrix:
    H: np.ndarray  # (n_q, n_q) int64, 1-based EH values or INF_EH
    n_q: int
    max_s: int
    T: np.ndarray | None = None
    k_h: int | None = None

    def max_finite(self) -> int:
        fin = self.H[self.H != INF_EH]
        return int(fin.max()) if fin.size else 0

    def all_finite(self) -> bool:
        return bool(np.all(self.H != INF_EH))


def neighboring_graph(G: GraphIndex, q, S: int, knn) -> NeighboringGraph:
    """Induced subgraph over the first ``S`` entries of ``knn`` (``q`` only identifies the query)."""
    ids = np.asarray(knn.ids if hasattr(knn, "ids") else knn, dtype=np.int64)
    if S < 1:
        raise ValueError("S must be >= 1")
    if S > len(ids):
        raise ValueError(f"S={S} exceeds the {len(ids)} known neighbors")
    ids = np.ascontiguousarray(ids[:S])
    adj = K.induced_adjacency(ids, G.base_adj, G.base_deg, G.extra_adj, G.extra_deg,
                              G._rank_scratch)
    return NeighboringGraph(ids, adj)


def compute_hardness(ng: NeighboringGraph, n_q: int) -> HardnessMatrix:
    """Escape hardness among the first ``n_q`` ranks of ``ng`` (``ng`` spans ``max_s`` ranks).

    The closure starts from the full ``max_s x max_s`` adjacency, so edges
    between ranks beyond ``n_q`` count from the first step.
    """
    if not 1 <= n_q <= ng.size:
        raise ValueError(f"n_q={n_q} must lie in [1, {ng.size}]")
    H = K.hardness_closure(np.ascontiguousarray(ng.adj), n_q)
    return HardnessMatrix(H, n_q, ng.size)


def reachable_matrix(hm: HardnessMatrix, k_h: int) -> np.ndarray:
    """``T[i, j] = H[i, j] <= k_h``; also stored on ``hm``."""
    if k_h < hm.n_q:
        raise ValueError(f"K_h={k_h} must be >= N_q={hm.n_q}")
    T = hm.H <= k_h
    hm.T, hm.k_h = T, k_h
    return T


def _reaches(adj: np.ndarray, S: int, src: int, dst: int) -> bool:
    seen = np.zeros(S, dtype=bool)
    seen[src] = True
    todo = deque([src])
    while todo:
        u = todo.popleft()
        if u == dst:
            return True
        for v in np.flatnonzero(adj[u, :S]):
            if not seen[v]:
                seen[v] = True
                todo.append(v)
    return False


def brute_force_eh(ng: NeighboringGraph, i: int, j: int) -> int:
    """EH(N_i, N_j) by testing reachability inside every prefix subgraph (1-based ``i``, ``j``)."""
    for S in range(max(i, j), ng.size + 1):
        if _reaches(ng.adj, S, i - 1, j - 1):
            return S
    return INF_EH


def brute_force_matrix(ng: NeighboringGraph, n_q: int) -> np.ndarray:
    H = np.empty((n_q, n_q), dtype=np.int64)
    for i in range(1, n_q + 1):
        for j in range(1, n_q + 1):
            H[i - 1, j - 1] = brute_force_eh(ng, i, j)
    return H


def minimax_path_eh(ng: NeighboringGraph, i: int, j: int) -> int:
    """EH straight from the definition: minimize the largest rank on an i->j path.

    Dijkstra-style bottleneck search; independent of the prefix-closure view.
    """
    import heapq

    best = np.full(ng.size, INF_EH, dtype=np.int64)
    best[i - 1] = i
    heap = [(i, i - 1)]
    while heap:
        c, u = heapq.heappop(heap)
        if c > best[u]:
            continue
        if u == j - 1:
            return int(c)
        for v in np.flatnonzero(ng.adj[u]):
            nc = max(c, v + 1)
            if nc < best[v]:
                best[v] = nc
                heapq.heappush(heap, (nc, v))
    return INF_EH


def query_hardness(G: GraphIndex, q, knn, n_q: int, k_h: int, max_s: int | None = None) -> HardnessMatrix:
    """Neighboring graph, H and T for one query in a single call."""
    max_s = 5 * n_q if max_s is None else max_s
    max_s = min(max_s, len(knn))
    n_q = min(n_q, max_s)
    ng = neighboring_graph(G, q, max_s, knn)
    hm = compute_hardness(ng, n_q)
    reachable_matrix(hm, max(k_h, n_q))
    return hm


def delaunay_defect_instance(points, seed: int = 0):
    """Planar instance with one Delaunay edge removed and a query that isolates it.

    Builds the Delaunay graph (both directions) of 2-D ``points``, removes a
    random edge ``(u, v)`` whose midpoint has ``u`` and ``v`` as its two
    strictly nearest points, and returns ``(adjacency lists, u, v, query)``.
    For that query the 2-neighbor subgraph has no edges.
    """
    from scipy.spatial import Delaunay

    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (n, 2) point array")
    tri = Delaunay(pts)
    edges = set()
    for simplex in tri.simplices:
        for a in range(3):
            for b in range(a + 1, 3):
                u, v = sorted((int(simplex[a]), int(simplex[b])))
                edges.add((u, v))
    rng = np.random.default_rng(seed)
    order = sorted(edges)
    rng.shuffle(order)
    for u, v in order:
        mid = (pts[u] + pts[v]) / 2.0
        d = np.sum((pts - mid) ** 2, axis=1)
        top = np.argsort(d, kind="stable")
        if {int(top[0]), int(top[1])} == {u, v} and d[top[2]] > d[top[1]] + 1e-12:
            adj: list[list[int]] = [[] for _ in range(len(pts))]
            for a, b in sorted(edges):
                if (a, b) == (u, v):
                    continue
                adj[a].append(b)
                adj[b].append(a)
            return adj, u, v, mid
    raise ValueError("no Delaunay edge with an isolating midpoint query")
