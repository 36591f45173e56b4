"""Greedy best-first search over a :class:`GraphIndex`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .graph import GraphIndex


@dataclass
class SearchResult:
    ids: np.ndarray
    dists: np.ndarray
    ndc: int
    visited: np.ndarray | None = None
    visited_dists: np.ndarray | None = None
    pool: np.ndarray = field(default=None, repr=False)  # final result list, tombstones included


def greedy_search(G: GraphIndex, q, k: int, ep: int | None = None, L: int | None = None,
                  capture_visited: bool = False, prepared: bool = False) -> SearchResult:
    """Return the ``k`` closest live vertices found with a result list of size ``L``.

    ``q`` is a raw query; pass ``prepared=True`` when it is already in the
    store's space (normalized for cosine).
    """
    if k < 1:
        raise ValueError("k must be positive")
    L = k if L is None else int(L)
    if L < k:
        raise ValueError(f"L={L} must be >= k={k}")
    if G.n == 0:
        empty = np.empty(0, dtype=np.int64)
        return SearchResult(empty, np.empty(0), 0,
                            empty if capture_visited else None,
                            np.empty(0) if capture_visited else None, empty)
    ep = G.entry if ep is None else int(ep)
    if not 0 <= ep < G.n:
        raise ValueError(f"entry point {ep} out of range")
    if G.removed[ep]:
        raise ValueError(f"entry point {ep} has been removed from the graph")
    if not prepared:
        q = G.store.prepare(q)
    ids, ds, ndc, vis, vis_d = K.beam_search(
        G.store.data, int(G.metric), G.base_adj, G.base_deg, G.extra_adj, G.extra_deg,
        q, ep, L, G._stamps, G.next_epoch(), capture_visited)
    live = ~G.tomb[ids]
    out_ids = ids[live][:k]
    out_d = ds[live][:k]
    return SearchResult(out_ids, out_d, int(ndc),
                        vis if capture_visited else None,
                        vis_d if capture_visited else None, ids)


def range_collect(G: GraphIndex, q, radius: float, L_big: int, ep: int | None = None,
                  prepared: bool = False) -> np.ndarray:
    """Live vertices visited by a wide search whose distance to ``q`` is below ``radius``.

    Surrogate for a brute-force range scan; the result is a subset of the
    exact range set, in visit order.
    """
    if L_big < 1:
        raise ValueError("L_big must be >= 1")
    res = greedy_search(G, q, 1, ep, L_big, capture_visited=True, prepared=prepared)
    vis = res.visited
    keep = (res.visited_dists < radius) & ~G.tomb[vis]
    return vis[keep]
