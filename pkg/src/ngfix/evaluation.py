"""Accuracy metrics and search-list sweeps."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import astuple, dataclass

import numpy as np

from .core import Metric
from .graph import GraphIndex
from .search import greedy_search

CSV_HEADER = ("L", "recall", "rderr", "ndc", "qps")


def _ids(x) -> np.ndarray:
    return np.asarray(x.ids if hasattr(x, "ids") else x, dtype=np.int64)


def recall_at_k(result, gt, k: int) -> float:
    """``|result[:k] & gt[:k]| / k``; a short result still divides by ``k``."""
    g = _ids(gt)
    if k < 1 or len(g) < k:
        raise ValueError(f"need k >= 1 and at least k={k} ground-truth neighbors")
    return len(np.intersect1d(_ids(result)[:k], g[:k])) / k


def _rooted(d: np.ndarray, metric: Metric) -> np.ndarray:
    if metric == Metric.L2:
        return np.sqrt(np.maximum(d, 0.0))
    return d


def rderr_at_k(result, gt, k: int, metric=Metric.L2) -> float:
    """Mean of ``d(ANN_i) / d(N_i) - 1`` over ranks ``1..k`` (Euclidean distances are rooted).

    A rank with zero true distance contributes 0 when the returned distance is
    zero too and is otherwise left out of the mean.
    """
    metric = Metric.parse(metric)
    if metric == Metric.IP:
        raise ValueError("rderr is undefined for inner-product similarity")
    rd = np.asarray(result.dists, dtype=np.float64)[:k]
    gd = np.asarray(gt.dists, dtype=np.float64)[:k]
    if len(gd) < k:
        raise ValueError(f"need at least k={k} ground-truth neighbors")
    if len(rd) < k:
        raise ValueError("result shorter than k")
    rd, gd = _rooted(rd, metric), _rooted(gd, metric)
    total, terms = 0.0, 0
    for a, b in zip(rd, gd):
        if b == 0:
            if a == 0:
                terms += 1
            continue
        total += a / b - 1.0
        terms += 1
    return total / terms if terms else 0.0


@dataclass
class SweepRow:
    L: int
    recall: float
    rderr: float
    ndc: float
    qps: float


def sweep(G: GraphIndex, queries, gt, k: int = 10, L_start: int | None = None,
          L_step: int = 10, L_max: int = 100, ep: int | None = None) -> list[SweepRow]:
    """Recall/rderr/NDC/QPS for ``L = L_start, L_start + L_step, ... <= L_max``.

    Only the search loop is timed. rderr averages over queries that returned
    all k results (tombstones can crowd a small list); it is NaN under inner
    product or when no query did.
    """
    L_start = k if L_start is None else L_start
    if L_step < 1:
        raise ValueError("L_step must be >= 1")
    qs = G.store.prepare(np.asarray(queries, dtype=np.float32))
    rows: list[SweepRow] = []
    for L in range(L_start, L_max + 1, L_step):
        results = []
        t0 = time.perf_counter()
        for q in qs:
            results.append(greedy_search(G, q, k, ep, L, prepared=True))
        wall = time.perf_counter() - t0
        rec = float(np.mean([recall_at_k(r, g, k) for r, g in zip(results, gt)]))
        if G.metric == Metric.IP:
            err = math.nan
        else:
            errs = [rderr_at_k(r, g, k, G.metric) for r, g in zip(results, gt) if len(r.ids) >= k]
            err = float(np.mean(errs)) if errs else math.nan
        ndc = float(np.mean([r.ndc for r in results]))
        rows.append(SweepRow(L, rec, err, ndc, len(qs) / wall if wall > 0 else math.inf))
    return rows


def ndc_to_reach(rows: list[SweepRow], target: float) -> float:
    """Mean NDC of the first row whose recall reaches ``target`` (inf if none does)."""
    for row in rows:
        if row.recall >= target:
            return row.ndc
    return math.inf


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        L, rec, err, ndc, qps = astuple(row)
        w.writerow([L, f"{rec:.6f}", f"{err:.6f}", f"{ndc:.2f}", f"{qps:.1f}"])
    return buf.getvalue()
