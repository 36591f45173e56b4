"""Query sets and ground truth: exact/approximate kNN, dedup, augmentation
and a synthetic out-of-distribution generator for desk-scale runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .core import Metric, VectorStore
from .graph import GraphIndex
from .search import greedy_search


@dataclass
class KnnList:
    """Neighbors of one query sorted by ``(distance, id)``; rank ``i`` (1-based) is ``ids[i-1]``."""

    ids: np.ndarray
    dists: np.ndarray
    provenance: str = "exact"

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.dists = np.asarray(self.dists, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def depth(self) -> int:
        return len(self.ids)

    def rank(self, x: int) -> int | None:
        hit = np.flatnonzero(self.ids == x)
        return int(hit[0]) + 1 if len(hit) else None

    def truncated(self, depth: int) -> "KnnList":
        return KnnList(self.ids[:depth], self.dists[:depth], self.provenance)


@dataclass
class QuerySet:
    vectors: np.ndarray
    gt: list[KnnList] | None = None
    provenance: str = "exact"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float32))
        if self.vectors.ndim == 1:
            self.vectors = self.vectors.reshape(1, -1)

    def __len__(self) -> int:
        return len(self.vectors)

    def subset(self, idx) -> "QuerySet":
        idx = np.asarray(idx, dtype=np.int64)
        gt = None if self.gt is None else [self.gt[i] for i in idx]
        return QuerySet(self.vectors[idx], gt, self.provenance, dict(self.metadata))

    def gt_depth(self) -> int:
        if not self.gt:
            return 0
        return min(len(g) for g in self.gt)


# -- exact ground truth ----------------------------------------------------------


def _approx_block(rows: np.ndarray, qs: np.ndarray, metric: Metric, row_sq) -> np.ndarray:
    dots = qs.astype(np.float64) @ rows.astype(np.float64).T
    if metric == Metric.L2:
        q_sq = np.einsum("ij,ij->i", qs.astype(np.float64), qs.astype(np.float64))
        return q_sq[:, None] - 2.0 * dots + row_sq[None, :]
    if metric == Metric.COSINE:
        return 1.0 - dots
    return -dots


def exact_knn(store: VectorStore, queries, depth: int, live: np.ndarray | None = None,
              batch: int = 512, prepared: bool = False):
    """Exact top-``depth`` neighbors by ``(distance, id)``.

    Candidates come from a batched matrix product; every candidate within a
    rounding margin of the cut is re-scored with the same scalar kernel the
    searches use, so the ordering agrees bit-for-bit with search distances.
    Accepts one query (returns a ``KnnList``) or a batch (returns a list).
    """
    qs = np.asarray(queries, dtype=np.float32)
    single = qs.ndim == 1
    qs = qs.reshape(-1, store.dim)
    if not prepared:
        qs = store.prepare(qs)
    ids_all = np.arange(store.count) if live is None else np.flatnonzero(live[: store.count])
    if depth < 1 or depth > len(ids_all):
        raise ValueError(f"depth {depth} outside [1, {len(ids_all)}] live points")
    rows = np.ascontiguousarray(store.data[ids_all])
    row_sq = np.einsum("ij,ij->i", rows.astype(np.float64), rows.astype(np.float64))
    scale = float(row_sq.max()) if len(row_sq) else 1.0
    metric = store.metric
    out: list[KnnList] = []
    for b in range(0, len(qs), batch):
        block = qs[b : b + batch]
        approx = _approx_block(rows, block, metric, row_sq)
        for r, q in enumerate(block):
            a = approx[r]
            kth = np.partition(a, depth - 1)[depth - 1]
            q_sq = float(np.dot(q.astype(np.float64), q.astype(np.float64)))
            tol = 1e-9 * (scale + q_sq) + 1e-12
            cand = np.flatnonzero(a <= kth + tol)
            d = K.dist_many(rows[cand], q, int(metric))
            order = np.lexsort((ids_all[cand], d))[:depth]
            out.append(KnnList(ids_all[cand[order]], d[order], "exact"))
    return out[0] if single else out


def approx_knn(G: GraphIndex, q, depth: int, L_gt: int | None = None, prepared: bool = False) -> KnnList:
    """Ground truth approximated by a wide greedy search from the entry point."""
    L_gt = 8 * depth if L_gt is None else int(L_gt)
    if L_gt < depth:
        raise ValueError("L_gt must be >= depth")
    res = greedy_search(G, q, depth, G.entry, L_gt, prepared=prepared)
    return KnnList(res.ids, res.dists, f"approx({L_gt})")


def attach_ground_truth(G: GraphIndex, qset: QuerySet, depth: int, mode: str = "exact",
                        L_gt: int | None = None) -> QuerySet:
    """Fill ``qset.gt`` against the live points of ``G`` (in place; returns ``qset``)."""
    depth = min(depth, int(G.live_mask().sum()))
    if mode == "exact":
        qset.gt = exact_knn(G.store, qset.vectors, depth, live=G.live_mask())
        qset.provenance = "exact"
    elif mode == "approx":
        qset.gt = [approx_knn(G, q, depth, L_gt) for q in qset.vectors]
        qset.provenance = qset.gt[0].provenance if qset.gt else "approx"
    else:
        raise ValueError(f"unknown ground-truth mode {mode!r}")
    return qset


# -- query set utilities ------------------------------------------------------------


def dedup(queries, tolerance: float = 0.0, metric="l2") -> QuerySet:
    """Keep a query only if it is farther than ``tolerance`` from every earlier kept query."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    qs = queries if isinstance(queries, QuerySet) else QuerySet(queries)
    vecs = qs.vectors
    metric = Metric.parse(metric)
    if tolerance == 0 and metric == Metric.L2:
        seen = set()
        keep = []
        for i, row in enumerate(vecs):
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                keep.append(i)
    else:
        prepared = vecs
        if metric == Metric.COSINE:
            prepared = VectorStore(vecs, metric).data
        keep = []
        kept_rows = np.empty((0, vecs.shape[1]), dtype=np.float32)
        for i, row in enumerate(prepared):
            if len(kept_rows):
                d = K.dist_many(kept_rows, row, int(metric))
                if np.any(d <= tolerance):
                    continue
            keep.append(i)
            kept_rows = np.vstack([kept_rows, row[None, :]])
    return qs.subset(keep)


def augment(T, ratio: float, c: float = 0.3, seed: int = 0, noise_interp: str = "var") -> QuerySet:
    """Synthetic queries: ``ceil(ratio)`` noisy copies of each historical query.

    Every dimension gets independent zero-mean Gaussian noise. With
    ``noise_interp="var"`` the variance is ``sqrt(c/d)``; with ``"std"`` the
    standard deviation is.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    vecs = T.vectors if isinstance(T, QuerySet) else np.asarray(T, dtype=np.float32)
    d = vecs.shape[1]
    if noise_interp == "var":
        std = math.sqrt(math.sqrt(c / d))
    elif noise_interp == "std":
        std = math.sqrt(c / d)
    else:
        raise ValueError("noise_interp must be 'var' or 'std'")
    copies = math.ceil(ratio)
    rng = np.random.default_rng(seed)
    base = np.repeat(vecs, copies, axis=0)
    noise = rng.normal(0.0, std, size=base.shape)
    out = QuerySet((base + noise).astype(np.float32), None, "synthetic")
    out.metadata.update(c=c, ratio=ratio, noise_interp=noise_interp, std=std)
    return out


# -- synthetic out-of-distribution workload --------------------------------------


class SyntheticWorkload(NamedTuple):
    base: VectorStore
    ood: QuerySet
    iid: QuerySet


def synth_ood(n: int, d: int, n_queries: int, shift: float, seed: int = 0,
              n_clusters: int | None = None, metric="l2",
              n_directions: int = 4) -> SyntheticWorkload:
    """Gaussian-mixture base data with displaced query clouds.

    Each cluster owns ``n_directions`` fixed unit offsets; an OOD query is a
    cluster mean moved ``shift`` cluster-radii along one of them, plus
    isotropic noise. In-distribution queries are perturbed base points.
    Deterministic under ``seed``.
    """
    if n < 1 or d < 1 or n_queries < 1:
        raise ValueError("n, d and n_queries must be >= 1")
    rng = np.random.default_rng(seed)
    n_clusters = n_clusters or max(1, min(64, n // 500))
    centers = rng.normal(0.0, 1.0, size=(n_clusters, d))
    spread = 0.35
    sizes = rng.multinomial(n, np.full(n_clusters, 1.0 / n_clusters))
    labels = np.repeat(np.arange(n_clusters), sizes)
    rng.shuffle(labels)
    base = centers[labels] + rng.normal(0.0, spread, size=(n, d))

    dirs = rng.normal(size=(n_clusters, n_directions, d))
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    radius = spread * math.sqrt(d)
    qc = rng.integers(0, n_clusters, size=n_queries)
    qd = rng.integers(0, n_directions, size=n_queries)
    ood = (centers[qc] + shift * radius * dirs[qc, qd]
           + rng.normal(0.0, 0.5 * spread, size=(n_queries, d)))

    pick = rng.integers(0, n, size=n_queries)
    iid = base[pick] + rng.normal(0.0, 0.5 * spread, size=(n_queries, d))

    store = VectorStore(base.astype(np.float32), metric)
    return SyntheticWorkload(store, QuerySet(ood.astype(np.float32), None, "synthetic"),
                             QuerySet(iid.astype(np.float32), None, "synthetic"))
