"""Dynamic upkeep: partial rebuild after insertions, lazy deletion and compaction."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .fixing import DEFAULT_SCHEDULE, FixConfig, FixReport, fix_query, fix_workload
from .graph import GraphIndex
from .search import greedy_search
from .workload import KnnList, QuerySet, attach_ground_truth

log = logging.getLogger(__name__)


@dataclass
class MaintenanceConfig:
    r: float = 0.2
    delete_threshold: float = 0.01
    repair_fix: FixConfig = field(default_factory=lambda: FixConfig(100, 100, 500))
    repair_L: int = 800

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [0, 1]")
        if not 0.0 <= self.delete_threshold <= 1.0:
            raise ValueError("delete_threshold must lie in [0, 1]")
        if self.repair_L < 1:
            raise ValueError("repair_L must be >= 1")


def partial_rebuild(G: GraphIndex, T: QuerySet, r: float, schedule=DEFAULT_SCHEDULE,
                    seed: int = 0, gt_mode: str = "exact", **fix_kw) -> FixReport:
    """Drop a random share ``r`` of every vertex's extra edges and replay ``ceil(r |T|)`` queries.

    Surviving extra edges get tag 0. Ground truth of the replayed queries is
    recomputed against the current live points. ``r == 0`` changes nothing.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    if r == 0 or G.n == 0:
        return FixReport()
    rng = np.random.default_rng(seed)
    n = G.n
    for u in range(n):
        deg = int(G.extra_deg[u])
        drop = math.floor(r * deg)
        if drop:
            G.remove_extra_edges(u, rng.choice(deg, size=drop, replace=False))
        G.extra_tag[u, : G.extra_deg[u]] = 0
    if len(T) == 0:
        return FixReport()
    m = min(len(T), math.ceil(r * len(T)))
    picked = np.sort(rng.choice(len(T), size=m, replace=False))
    replay = QuerySet(T.vectors[picked], None, T.provenance, dict(T.metadata))
    schedule = list(schedule)
    attach_ground_truth(G, replay, max(c.max_s for c in schedule), gt_mode)
    return fix_workload(G, replay, schedule, **fix_kw)


def delete_point(G: GraphIndex, v: int) -> None:
    """Tombstone ``v``; searches still route through it but never return it."""
    G._check(v)
    if G.tomb[v]:
        return
    G.tomb[v] = True
    if G.entry == v:
        G.refresh_entry()


def compact(G: GraphIndex, cfg: MaintenanceConfig | None = None, force: bool = False) -> int:
    """Strip every pending tombstone from the adjacency and repair the hole each one leaves.

    For each deleted point an approximate neighbor list over live points is
    taken while the graph is still intact; after stripping, NGFix runs with
    the deleted vector as the query. Returns the number of repaired ids, or 0
    when below ``delete_threshold * n`` and not forced.
    """
    cfg = cfg or MaintenanceConfig()
    pending = G.pending_deletes()
    if len(pending) == 0:
        return 0
    if not force and len(pending) < cfg.delete_threshold * G.n:
        return 0
    data = G.store.data
    live_count = int(G.live_mask().sum())
    depth = min(cfg.repair_fix.max_s, live_count)
    knns: dict[int, KnnList] = {}
    if depth > 0 and G.entry >= 0:
        L = max(cfg.repair_L, depth)
        for p in pending:
            res = greedy_search(G, data[p], depth, G.entry, L, prepared=True)
            knns[int(p)] = KnnList(res.ids, res.dists, f"approx({L})")

    gone = np.zeros(G.n, dtype=bool)
    gone[pending] = True
    for u in range(G.n):
        if gone[u]:
            G.base_deg[u] = 0
            G.base_adj[u, :] = -1
            G.extra_deg[u] = 0
            G.extra_adj[u, :] = -1
            G.extra_tag[u, :] = 0
            continue
        row = G.base_adj[u, : G.base_deg[u]]
        if gone[row].any():
            G.set_base_neighbors(u, row[~gone[row]])
        ex = G.extra_adj[u, : G.extra_deg[u]]
        hit = np.flatnonzero(gone[ex])
        if len(hit):
            G.remove_extra_edges(u, hit)
    G.removed[pending] = True

    for p, knn in knns.items():
        if len(knn) == 0:
            continue
        fix_query(G, data[p], knn, cfg.repair_fix)
    log.info("compacted %d deleted points", len(pending))
    return len(pending)
