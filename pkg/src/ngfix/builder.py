"""Incremental construction of the base proximity graph (single HNSW layer)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import VectorStore, medoid
from .graph import GraphIndex

log = logging.getLogger(__name__)


@dataclass
class BaseBuildConfig:
    M: int = 16
    efC: int = 200
    seed: int = 0
    m_ex: int | None = 48

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if self.efC < self.M:
            raise ValueError("efC must be >= M")


def _link(G: GraphIndex, p: int, cfg: BaseBuildConfig, ep: int) -> None:
    K.insert_vertex(G.store.data, int(G.metric), G.base_adj, G.base_deg,
                    G.extra_adj, G.extra_deg, G.tomb, p, ep, G.m_base, cfg.efC,
                    G._stamps, G.next_epoch())


def build_base(store: VectorStore, cfg: BaseBuildConfig | None = None,
               progress: bool = False) -> GraphIndex:
    """Insert every point in id order, then fix the entry at the medoid.

    Construction searches start from vertex 0; the result is deterministic
    for a given store and config (``seed`` is unused by the sequential build).
    """
    cfg = cfg or BaseBuildConfig()
    if store.count < 1:
        raise ValueError("cannot build over an empty store")
    G = GraphIndex(store, m_base=cfg.M, m_ex=cfg.m_ex)
    step = max(store.count // 10, 1)
    for p in range(1, store.count):
        _link(G, p, cfg, 0)
        if progress and p % step == 0:
            log.info("built %d / %d", p, store.count)
    G.refresh_entry()
    return G


def insert_point(G: GraphIndex, vec, cfg: BaseBuildConfig | None = None) -> int:
    """Append ``vec`` to the store and link it into the base graph only."""
    cfg = cfg or BaseBuildConfig(M=G.m_base)
    (p,) = G.store.append(np.asarray(vec, dtype=np.float32).reshape(1, -1))
    G._ensure_capacity()
    p = int(p)
    if G.entry < 0 or G.removed[G.entry]:
        live = G.live_mask()
        live[p] = False
        if not live.any():
            G.entry = p
            return p
        G.entry = medoid(G.store, live)
    _link(G, p, cfg, G.entry)
    return p
