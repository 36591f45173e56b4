"""Directed graph index: capped base adjacency plus EH-tagged extra adjacency."""

from __future__ import annotations

import enum
import struct

import numpy as np

from .core import Metric, VectorStore, medoid

INF_TAG = 65535
MAGIC = b"NGFX"
VERSION = 1
_UNBOUNDED = 0xFFFFFFFF
_HEADER = struct.Struct("<4sIIIIiIII")


class EdgeResult(enum.Enum):
    ADDED = "added"
    REPLACED = "replaced"
    REJECTED = "rejected"


class IndexFormatError(ValueError):
    pass


def eh_to_tag(h) -> int:
    """Clamp an escape-hardness value into the 16-bit edge tag (65535 = infinite)."""
    h = int(h)
    return INF_TAG if h >= INF_TAG else max(h, 0)


class GraphIndex:
    """Adjacency over the vectors of a :class:`VectorStore`.

    ``m_ex=None`` lifts the extra-degree cap (no eviction ever happens).
    Deleted vertices stay in place with their tombstone set; ids are never
    reused or renumbered.
    """

    def __init__(self, store: VectorStore, m_base: int = 16, m_ex: int | None = 48):
        if m_base < 1:
            raise ValueError("m_base must be >= 1")
        if m_ex is not None and m_ex < 1:
            raise ValueError("m_ex must be >= 1 (or None for unbounded)")
        self.store = store
        self.m_base = int(m_base)
        self.m_ex = None if m_ex is None else int(m_ex)
        self.entry = -1
        n = store.count
        cap = max(n, 16)
        width = self.m_ex if self.m_ex is not None else 8
        self.base_adj = np.full((cap, self.m_base), -1, dtype=np.int64)
        self.base_deg = np.zeros(cap, dtype=np.int64)
        self.extra_adj = np.full((cap, width), -1, dtype=np.int64)
        self.extra_tag = np.zeros((cap, width), dtype=np.uint16)
        self.extra_deg = np.zeros(cap, dtype=np.int64)
        self.tomb = np.zeros(cap, dtype=np.bool_)
        # compacted: tombstoned and already stripped of all edges
        self.removed = np.zeros(cap, dtype=np.bool_)
        self._stamps = np.zeros(cap, dtype=np.int64)
        self._epoch = 0
        self._rank_scratch = np.full(cap, -1, dtype=np.int64)

    # -- sizes ------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.store.count

    @property
    def metric(self) -> Metric:
        return self.store.metric

    def live_mask(self) -> np.ndarray:
        return ~self.tomb[: self.n]

    def pending_deletes(self) -> np.ndarray:
        n = self.n
        return np.flatnonzero(self.tomb[:n] & ~self.removed[:n])

    def is_live(self, v: int) -> bool:
        return 0 <= v < self.n and not self.tomb[v]

    def _ensure_capacity(self) -> None:
        n = self.n
        cap = self.base_adj.shape[0]
        if n <= cap:
            return
        new = max(n, 2 * cap)

        def grow(a, fill):
            out = np.full((new,) + a.shape[1:], fill, dtype=a.dtype)
            out[:cap] = a
            return out

        self.base_adj = grow(self.base_adj, -1)
        self.base_deg = grow(self.base_deg, 0)
        self.extra_adj = grow(self.extra_adj, -1)
        self.extra_tag = grow(self.extra_tag, 0)
        self.extra_deg = grow(self.extra_deg, 0)
        self.tomb = grow(self.tomb, False)
        self.removed = grow(self.removed, False)
        self._stamps = grow(self._stamps, 0)
        self._rank_scratch = grow(self._rank_scratch, -1)

    def _widen_extra(self) -> None:
        cap, width = self.extra_adj.shape
        adj = np.full((cap, 2 * width), -1, dtype=np.int64)
        tag = np.zeros((cap, 2 * width), dtype=np.uint16)
        adj[:, :width] = self.extra_adj
        tag[:, :width] = self.extra_tag
        self.extra_adj, self.extra_tag = adj, tag

    def next_epoch(self) -> int:
        self._epoch += 1
        if self._epoch >= 2**62:
            self._stamps[:] = 0
            self._epoch = 1
        return self._epoch

    # -- adjacency ----------------------------------------------------------------

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def base_neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        return self.base_adj[v, : self.base_deg[v]].copy()

    def extra_neighbors(self, v: int) -> list[tuple[int, int]]:
        self._check(v)
        d = self.extra_deg[v]
        return [(int(a), int(t)) for a, t in zip(self.extra_adj[v, :d], self.extra_tag[v, :d])]

    def neighbors(self, v: int) -> list[int]:
        """Base neighbors followed by extra neighbors (tombstoned targets included)."""
        self._check(v)
        return (self.base_adj[v, : self.base_deg[v]].tolist()
                + self.extra_adj[v, : self.extra_deg[v]].tolist())

    def set_base_neighbors(self, v: int, ids) -> None:
        self._check(v)
        ids = [int(x) for x in ids]
        if len(ids) > self.m_base:
            raise ValueError(f"base degree {len(ids)} exceeds cap {self.m_base}")
        if v in ids or len(set(ids)) != len(ids):
            raise ValueError("self-loops and duplicate neighbors are not allowed")
        self.base_adj[v, :] = -1
        self.base_adj[v, : len(ids)] = ids
        self.base_deg[v] = len(ids)

    def add_extra_edge(self, u: int, v: int, eh_tag: int) -> EdgeResult:
        """Add ``u -> v`` to the extra adjacency, evicting the lowest-tag edge when full.

        A duplicate raises the stored tag to ``max(old, new)`` and reports
        ``REJECTED`` (no new edge). Edges already present in the base list are
        rejected too.
        """
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError("self-loop")
        tag = eh_to_tag(eh_tag)
        deg = int(self.extra_deg[u])
        row = self.extra_adj[u, :deg]
        hit = np.flatnonzero(row == v)
        if len(hit):
            i = int(hit[0])
            self.extra_tag[u, i] = max(int(self.extra_tag[u, i]), tag)
            return EdgeResult.REJECTED
        if np.any(self.base_adj[u, : self.base_deg[u]] == v):
            return EdgeResult.REJECTED
        if self.m_ex is None or deg < self.m_ex:
            if deg == self.extra_adj.shape[1]:
                self._widen_extra()
            self.extra_adj[u, deg] = v
            self.extra_tag[u, deg] = tag
            self.extra_deg[u] = deg + 1
            return EdgeResult.ADDED
        i = int(np.argmin(self.extra_tag[u, :deg]))
        if int(self.extra_tag[u, i]) < tag:
            self.extra_adj[u, i] = v
            self.extra_tag[u, i] = tag
            return EdgeResult.REPLACED
        return EdgeResult.REJECTED

    def set_extra_cap(self, m_ex: int | None) -> None:
        """Change the extra-degree cap; shrinking below an existing degree is refused."""
        if m_ex is not None:
            if m_ex < 1:
                raise ValueError("m_ex must be >= 1 (or None for unbounded)")
            top = int(self.extra_deg[: self.n].max()) if self.n else 0
            if top > m_ex:
                raise ValueError(f"a vertex already holds {top} extra edges > cap {m_ex}")
            while self.extra_adj.shape[1] < m_ex:
                self._widen_extra()
        self.m_ex = None if m_ex is None else int(m_ex)

    def remove_extra_edges(self, u: int, positions) -> None:
        deg = int(self.extra_deg[u])
        keep = np.ones(deg, dtype=bool)
        keep[list(positions)] = False
        adj = self.extra_adj[u, :deg][keep]
        tag = self.extra_tag[u, :deg][keep]
        self.extra_adj[u, :] = -1
        self.extra_tag[u, :] = 0
        self.extra_adj[u, : len(adj)] = adj
        self.extra_tag[u, : len(tag)] = tag
        self.extra_deg[u] = len(adj)

    def edge_count(self) -> tuple[int, int]:
        n = self.n
        return int(self.base_deg[:n].sum()), int(self.extra_deg[:n].sum())

    def refresh_entry(self) -> int:
        live = self.live_mask()
        self.entry = medoid(self.store, live) if live.any() else -1
        return self.entry

    # -- equality / serialization ------------------------------------------------

    def adjacency_equal(self, other: "GraphIndex") -> bool:
        if self.n != other.n or self.entry != other.entry:
            return False
        n = self.n
        if not (np.array_equal(self.base_deg[:n], other.base_deg[:n])
                and np.array_equal(self.extra_deg[:n], other.extra_deg[:n])
                and np.array_equal(self.tomb[:n], other.tomb[:n])
                and np.array_equal(self.removed[:n], other.removed[:n])):
            return False
        for v in range(n):
            if not np.array_equal(self.base_adj[v, : self.base_deg[v]],
                                  other.base_adj[v, : other.base_deg[v]]):
                return False
            d = self.extra_deg[v]
            if not (np.array_equal(self.extra_adj[v, :d], other.extra_adj[v, :d])
                    and np.array_equal(self.extra_tag[v, :d], other.extra_tag[v, :d])):
                return False
        return True

    def to_bytes(self) -> bytes:
        n = self.n
        m_ex = _UNBOUNDED if self.m_ex is None else self.m_ex
        parts = [_HEADER.pack(MAGIC, VERSION, int(self.metric), self.store.dim, n,
                              int(self.entry), self.m_base, m_ex, 1)]
        for v in range(n):
            bd = int(self.base_deg[v])
            ed = int(self.extra_deg[v])
            state = int(self.tomb[v]) | (int(self.removed[v]) << 1)
            parts.append(struct.pack("<BI", state, bd))
            parts.append(self.base_adj[v, :bd].astype("<u4").tobytes())
            parts.append(struct.pack("<I", ed))
            rec = np.empty(ed, dtype=[("id", "<u4"), ("tag", "<u2")])
            rec["id"] = self.extra_adj[v, :ed]
            rec["tag"] = self.extra_tag[v, :ed]
            parts.append(rec.tobytes())
        parts.append(self.store.data.astype("<f4").tobytes())
        return b"".join(parts)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, buf: bytes) -> "GraphIndex":
        if len(buf) < _HEADER.size:
            raise IndexFormatError("truncated index header")
        magic, version, metric, dim, n, entry, m_base, m_ex, flags = _HEADER.unpack_from(buf, 0)
        if magic != MAGIC:
            raise IndexFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise IndexFormatError(f"unsupported index version {version} (reader is v{VERSION})")
        off = _HEADER.size
        tomb = np.zeros(n, dtype=bool)
        removed = np.zeros(n, dtype=bool)
        base: list[np.ndarray] = []
        extra: list[np.ndarray] = []

        def take(nbytes):
            nonlocal off
            if off + nbytes > len(buf):
                raise IndexFormatError(f"truncated index at byte offset {off}")
            chunk = buf[off : off + nbytes]
            off += nbytes
            return chunk

        for v in range(n):
            t, bd = struct.unpack("<BI", take(5))
            tomb[v] = bool(t & 1)
            removed[v] = bool(t & 2)
            base.append(np.frombuffer(take(4 * bd), dtype="<u4").astype(np.int64))
            (ed,) = struct.unpack("<I", take(4))
            extra.append(np.frombuffer(take(6 * ed), dtype=[("id", "<u4"), ("tag", "<u2")]))
        if not flags & 1:
            raise IndexFormatError("index file carries no vectors")
        data = np.frombuffer(take(4 * n * dim), dtype="<f4").reshape(n, dim)
        if off != len(buf):
            raise IndexFormatError(f"trailing bytes after offset {off}")

        store = VectorStore.__new__(VectorStore)
        store.metric = Metric(metric)
        store._buf = np.array(data, dtype=np.float32)
        store._count = n
        g = cls(store, m_base=m_base, m_ex=None if m_ex == _UNBOUNDED else m_ex)
        g.entry = entry
        g.tomb[:n] = tomb
        g.removed[:n] = removed
        width_needed = max([len(e) for e in extra], default=0)
        while g.extra_adj.shape[1] < width_needed:
            g._widen_extra()
        for v in range(n):
            g.base_adj[v, : len(base[v])] = base[v]
            g.base_deg[v] = len(base[v])
            e = extra[v]
            g.extra_adj[v, : len(e)] = e["id"]
            g.extra_tag[v, : len(e)] = e["tag"]
            g.extra_deg[v] = len(e)
        return g

    @classmethod
    def load(cls, path) -> "GraphIndex":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
