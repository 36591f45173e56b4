"""Vector storage, metrics with distance counting, and entry-point selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K


class Metric(enum.IntEnum):
    """Distance kinds. Smaller is always closer.

    ``L2`` is squared Euclidean, ``COSINE`` is ``1 - cos`` and ``IP`` is the
    negated inner product.
    """

    L2 = K.L2
    COSINE = K.COSINE
    IP = K.IP

    @classmethod
    def parse(cls, name: "str | Metric") -> "Metric":
        if isinstance(name, Metric):
            return name
        aliases = {
            "l2": cls.L2, "euclidean": cls.L2, "squared-euclidean": cls.L2,
            "cosine": cls.COSINE, "cos": cls.COSINE, "cosine-distance": cls.COSINE,
            "ip": cls.IP, "inner-product": cls.IP, "negative-inner-product": cls.IP,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown metric {name!r}") from None


@dataclass
class DistanceCounter:
    """Number of distance evaluations performed in one search context."""

    ndc: int = 0

    def reset(self) -> None:
        self.ndc = 0


def distance(a, b, metric: Metric = Metric.L2, counter: DistanceCounter | None = None) -> float:
    """Distance between two raw vectors.

    Cosine distance normalizes both inputs here; stores hold pre-normalized
    rows so the kernels can use ``1 - dot`` directly.
    """
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    metric = Metric.parse(metric)
    if counter is not None:
        counter.ndc += 1
    if metric == Metric.COSINE:
        na = float(np.linalg.norm(a.astype(np.float64)))
        nb = float(np.linalg.norm(b.astype(np.float64)))
        if na == 0.0 or nb == 0.0:
            raise ValueError("cosine distance undefined for a zero vector")
        return 1.0 - float(np.dot(a.astype(np.float64), b.astype(np.float64))) / (na * nb)
    return float(K.dist(a, b, int(metric)))


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x.astype(np.float64), axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise ValueError(f"zero vector at row {bad} cannot be used with the cosine metric")
    return (x / norms[:, None]).astype(np.float32)


class VectorStore:
    """Dense float32 rows with a fixed dimension and metric.

    Rows are addressed by dense ids ``0..count-1``. Appending is supported
    (amortized growth); existing rows never move or change.
    """

    def __init__(self, data, metric: "Metric | str" = Metric.L2):
        arr = np.array(data, dtype=np.float32, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 1)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise ValueError(f"expected a 2-D array with dim >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
            raise ValueError(f"non-finite component in row {bad}")
        self.metric = Metric.parse(metric)
        if self.metric == Metric.COSINE and len(arr):
            arr = _normalize_rows(arr)
        self._buf = np.ascontiguousarray(arr)
        self._count = arr.shape[0]

    @property
    def dim(self) -> int:
        return self._buf.shape[1]

    @property
    def count(self) -> int:
        return self._count

    def __len__(self) -> int:
        return self._count

    @property
    def data(self) -> np.ndarray:
        return self._buf[: self._count]

    def __getitem__(self, i):
        return self.data[i]

    def prepare(self, q) -> np.ndarray:
        """Validate a query (or batch) and bring it into the store's space."""
        q = np.asarray(q, dtype=np.float32)
        if q.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {q.shape[-1]}")
        if not np.all(np.isfinite(q)):
            raise ValueError("query has non-finite components")
        if self.metric == Metric.COSINE:
            q = _normalize_rows(q.reshape(-1, self.dim)).reshape(q.shape)
        return np.ascontiguousarray(q)

    def append(self, vecs) -> np.ndarray:
        """Append rows; returns their new ids."""
        vecs = np.asarray(vecs, dtype=np.float32).reshape(-1, self.dim)
        vecs = self.prepare(vecs)
        need = self._count + len(vecs)
        if need > self._buf.shape[0]:
            cap = max(need, 2 * self._buf.shape[0], 16)
            grown = np.empty((cap, self.dim), dtype=np.float32)
            grown[: self._count] = self._buf[: self._count]
            self._buf = grown
        self._buf[self._count : need] = vecs
        ids = np.arange(self._count, need)
        self._count = need
        return ids

    def distances_to(self, q, ids=None) -> np.ndarray:
        """Exact distances from a prepared query to the given rows (all rows by default)."""
        rows = self.data if ids is None else self.data[np.asarray(ids, dtype=np.int64)]
        return _row_distances(rows, q, int(self.metric))


def _row_distances(rows: np.ndarray, q: np.ndarray, metric: int) -> np.ndarray:
    return K.dist_many(np.ascontiguousarray(rows), np.ascontiguousarray(q, dtype=np.float32), metric)


def medoid(store: VectorStore, live: np.ndarray | None = None) -> int:
    """Id of the stored vector nearest to the mean of the (live) rows.

    Ties break toward the smaller id.
    """
    ids = np.arange(store.count) if live is None else np.flatnonzero(live)
    if len(ids) == 0:
        raise ValueError("medoid of an empty store")
    rows = store.data[ids]
    mean = rows.astype(np.float64).mean(axis=0).astype(np.float32)
    if store.metric == Metric.COSINE:
        nrm = np.linalg.norm(mean)
        if nrm > 0:
            mean = (mean / nrm).astype(np.float32)
    d = _row_distances(rows, mean, int(store.metric))
    order = np.lexsort((ids, d))
    return int(ids[order[0]])
