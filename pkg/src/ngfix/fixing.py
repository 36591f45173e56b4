"""Escape-hardness-guided repair of query neighborhoods, and the multi-round
fixing schedule over a historical workload."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .graph import EdgeResult, GraphIndex
from .hardness import HardnessMatrix, compute_hardness, neighboring_graph, reachable_matrix

log = logging.getLogger(__name__)


@dataclass
class FixConfig:
    n_q: int = 100
    k_h: int = 100
    max_s: int | None = None  # defaults to 5 * n_q
    m_ex: int | None = 48

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError("N_q must be >= 1")
        if self.k_h < self.n_q:
            raise ValueError(f"K_h={self.k_h} must be >= N_q={self.n_q}")
        if self.m_ex is not None and self.m_ex < 1:
            raise ValueError("M_EX must be >= 1")
        if self.max_s is None:
            self.max_s = 5 * self.n_q
        if self.max_s < self.n_q:
            raise ValueError("MaxS must be >= N_q")

    @classmethod
    def parse_schedule(cls, text: str, m_ex: int | None = 48) -> list["FixConfig"]:
        """``"100:100:500,10:10:50"`` -> two rounds of ``N_q:K_h:MaxS``."""
        rounds = []
        for part in text.split(","):
            fields = [int(x) for x in part.strip().split(":")]
            if not 1 <= len(fields) <= 3:
                raise ValueError(f"bad round spec {part!r}")
            n_q = fields[0]
            k_h = fields[1] if len(fields) > 1 else n_q
            max_s = fields[2] if len(fields) > 2 else None
            rounds.append(cls(n_q, k_h, max_s, m_ex))
        return rounds


DEFAULT_SCHEDULE = (FixConfig(100, 100, 500), FixConfig(10, 10, 50))


def _propagate(T: np.ndarray, s: int, t: int) -> None:
    # everything reaching s now reaches everything t reaches
    T |= np.logical_and.outer(T[:, s], T[t, :])


def ngfix(G: GraphIndex, q, knn, cfg: FixConfig, hm: HardnessMatrix,
          T: np.ndarray | None = None) -> int:
    """Add extra edges until the first ``n_q`` neighbors are mutually K_h-reachable.

    Candidate pairs are visited by ascending ``(distance between endpoints,
    i, j)``. Returns the number of edges that entered the graph (added or
    replacing an evicted edge). ``T`` is updated in place.
    """
    T = reachable_matrix(hm, cfg.k_h) if T is None else T
    n_q = hm.n_q
    ids = np.asarray(knn.ids if hasattr(knn, "ids") else knn, dtype=np.int64)[:n_q]
    src, dst = np.nonzero(~T)
    if len(src) == 0:
        return 0
    d = K.dist_pairs(G.store.data, ids[src], ids[dst], int(G.metric))
    order = np.lexsort((dst, src, d))
    added = 0
    for o in order:
        s, t = int(src[o]), int(dst[o])
        if T[s, t]:
            continue
        T[s, t] = True
        res = G.add_extra_edge(int(ids[s]), int(ids[t]), int(hm.H[s, t]))
        if res is not EdgeResult.REJECTED:
            added += 1
        _propagate(T, s, t)
    return added


def fix_query(G: GraphIndex, q, knn, cfg: FixConfig) -> tuple[int, HardnessMatrix]:
    """Neighboring graph, hardness and NGFix for one prepared query."""
    max_s = min(cfg.max_s, len(knn))
    n_q = min(cfg.n_q, max_s)
    ng = neighboring_graph(G, q, max_s, knn)
    hm = compute_hardness(ng, n_q)
    T = reachable_matrix(hm, max(cfg.k_h, n_q))
    return ngfix(G, q, knn, cfg, hm, T.copy()), hm


@dataclass
class RoundReport:
    n_q: int
    k_h: int
    max_s: int
    queries: int = 0
    ngfix_edges: int = 0
    rfix_edges: int = 0
    rfix_iterations: int = 0
    seconds: float = 0.0
    per_query_edges: list[int] = field(default_factory=list)
    max_finite_eh: list[int] = field(default_factory=list)


@dataclass
class FixReport:
    rounds: list[RoundReport] = field(default_factory=list)

    @property
    def total_edges(self) -> int:
        return sum(r.ngfix_edges + r.rfix_edges for r in self.rounds)

    def bound_violations(self) -> int:
        """Queries whose NGFix added more than ``2 (N_q - 1)`` edges."""
        return sum(e > 2 * (r.n_q - 1) for r in self.rounds for e in r.per_query_edges)


def fix_workload(G: GraphIndex, queries, schedule=DEFAULT_SCHEDULE, *, rfix: bool = True,
                 l_probe: int | None = None, rfix_max_iters: int = 10,
                 rfix_brute_force: bool = False, rfix_sweeps: int = 1) -> FixReport:
    """Run NGFix for every query in every round; RFix in the last (smallest ``N_q``) round.

    ``queries`` must carry ground truth at least as deep as the largest
    ``MaxS`` (clamped to the number of live points). ``rfix_sweeps > 1``
    repeats the RFix pass over the final round's queries until a pass adds
    no edge.
    """
    from .rfix import rfix as run_rfix

    schedule = list(schedule)
    report = FixReport()
    if len(queries) == 0 or not schedule:
        report.rounds = [RoundReport(c.n_q, c.k_h, c.max_s) for c in schedule]
        return report
    if queries.gt is None:
        raise ValueError("queries carry no ground truth")
    n_live = int(G.live_mask().sum())
    need = min(max(c.max_s for c in schedule), n_live)
    if queries.gt_depth() < need:
        raise ValueError(f"ground truth depth {queries.gt_depth()} < required MaxS {need}")
    final = min(range(len(schedule)), key=lambda r: (schedule[r].n_q, -r))
    qs = G.store.prepare(queries.vectors)

    for r, cfg in enumerate(schedule):
        G.set_extra_cap(cfg.m_ex)
        rep = RoundReport(cfg.n_q, cfg.k_h, cfg.max_s)
        t0 = time.perf_counter()
        for qi in range(len(qs)):
            added, hm = fix_query(G, qs[qi], queries.gt[qi], cfg)
            rep.ngfix_edges += added
            rep.per_query_edges.append(added)
            rep.max_finite_eh.append(hm.max_finite())
            if rfix and r == final:
                out = run_rfix(G, qs[qi], queries.gt[qi], min(cfg.n_q, len(queries.gt[qi])),
                               l_probe, rfix_max_iters, brute_force=rfix_brute_force,
                               prepared=True)
                rep.rfix_iterations += out.iterations
                rep.rfix_edges += out.edges
        if rfix and r == final:
            for _ in range(rfix_sweeps - 1):
                pass_edges = 0
                for qi in range(len(qs)):
                    out = run_rfix(G, qs[qi], queries.gt[qi],
                                   min(cfg.n_q, len(queries.gt[qi])), l_probe,
                                   rfix_max_iters, brute_force=rfix_brute_force,
                                   prepared=True)
                    rep.rfix_iterations += out.iterations
                    pass_edges += out.edges
                rep.rfix_edges += pass_edges
                if pass_edges == 0:
                    break
        rep.queries = len(qs)
        rep.seconds = time.perf_counter() - t0
        log.info("round N_q=%d: %d ngfix edges, %d rfix edges, %.1fs",
                 cfg.n_q, rep.ngfix_edges, rep.rfix_edges, rep.seconds)
        report.rounds.append(rep)
    return report
