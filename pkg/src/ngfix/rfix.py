"""Reachability repair: when a search from the entry stalls short of the query's
vicinity, give the vertex it stalled at extra edges toward the query."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import INF_TAG, EdgeResult, GraphIndex
from .search import greedy_search, range_collect


class RFixStatus(enum.Enum):
    FIXED = "fixed"
    UNNECESSARY = "unnecessary"
    CAPPED = "capped"


@dataclass
class RFixStep:
    status: RFixStatus
    edges: int = 0
    anchor: int = -1  # ANN_1 of the probe search


@dataclass
class RFixOutcome:
    iterations: int  # rfix_once calls that added at least one edge
    edges: int
    status: RFixStatus


def _knn_ids_dists(G: GraphIndex, q, knn):
    ids = np.asarray(knn.ids if hasattr(knn, "ids") else knn, dtype=np.int64)
    dists = getattr(knn, "dists", None)
    if dists is None:
        dists = G.store.distances_to(q, ids) if len(ids) else np.empty(0)
    return ids, np.asarray(dists, dtype=np.float64)


def _closer_than(G: GraphIndex, q, radius: float, l_probe: int, brute_force: bool) -> np.ndarray:
    if brute_force:
        live = np.flatnonzero(G.live_mask())
        d = K.dist_many(G.store.data[live], q, int(G.metric))
        return live[d < radius]
    return range_collect(G, q, radius, l_probe, prepared=True)


def rfix_once(G: GraphIndex, q, knn, n_q: int, l_probe: int | None = None,
              brute_force: bool = False, prepared: bool = False) -> RFixStep:
    """One probe-and-repair step for a query.

    The probe is ``greedy_search(q, k=1, entry, L=n_q)``. Repair is needed
    when its answer ranks behind ``N_{n_q}`` in the ``(distance, id)``
    order. ``brute_force`` scans every live point for the candidate set
    instead of using a wide search with list size ``l_probe`` (default
    ``5 * n_q``).
    """
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    if not prepared:
        q = G.store.prepare(q)
    ids, dists = _knn_ids_dists(G, q, knn)
    if len(ids) < n_q:
        raise ValueError(f"need {n_q} known neighbors, have {len(ids)}")
    res = greedy_search(G, q, 1, G.entry, n_q, prepared=True)
    if len(res.ids) == 0:
        return RFixStep(RFixStatus.UNNECESSARY)
    a, da = int(res.ids[0]), float(res.dists[0])
    last, d_last = int(ids[n_q - 1]), float(dists[n_q - 1])
    if not K.key_less(d_last, last, da, a):
        return RFixStep(RFixStatus.UNNECESSARY, 0, a)

    cand = _closer_than(G, q, da, l_probe or 5 * n_q, brute_force)
    cand = cand[cand != a]
    data, metric = G.store.data, int(G.metric)
    d_a = K.dist_many(data[cand], data[a], metric)
    order = np.lexsort((cand, d_a))
    kept: list[int] = []
    for o in order:
        v = int(cand[o])
        if all(K.dist(data[v], data[r], metric) > d_a[o] for r in kept):
            kept.append(v)
    added = 0
    for v in kept:
        if G.add_extra_edge(a, v, INF_TAG) is not EdgeResult.REJECTED:
            added += 1
    # nothing entered the graph: either the cap blocked it or there is no way forward
    status = RFixStatus.FIXED if added else RFixStatus.CAPPED
    return RFixStep(status, added, a)


def rfix(G: GraphIndex, q, knn, n_q: int, l_probe: int | None = None, max_iters: int = 10,
         brute_force: bool = False, prepared: bool = False) -> RFixOutcome:
    """Repeat :func:`rfix_once` until the probe reaches the vicinity, nothing can be added, or ``max_iters``."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not prepared:
        q = G.store.prepare(q)
    iters = edges = 0
    status = RFixStatus.FIXED
    while iters < max_iters:
        step = rfix_once(G, q, knn, n_q, l_probe, brute_force, prepared=True)
        status = step.status
        if status is not RFixStatus.FIXED:
            break
        iters += 1
        edges += step.edges
    return RFixOutcome(iters, edges, status)
