"""Numba kernels for the hot paths: distances, beam search, RNG selection,
neighborhood extraction and the bitset closure behind escape hardness.

Every function here works on plain arrays so it can be jitted; the public
wrappers live in the other modules. Orderings are lexicographic on
``(distance, id)`` throughout.
"""

import numba
import numpy as np

L2 = 0
COSINE = 1
IP = 2

INF_EH = np.int64(2**31 - 1)


@numba.njit(cache=True, inline="always")
def dist(a, b, metric):
    if metric == L2:
        s = 0.0
        for i in range(a.shape[0]):
            t = np.float64(a[i]) - np.float64(b[i])
            s += t * t
        return s
    s = 0.0
    for i in range(a.shape[0]):
        s += np.float64(a[i]) * np.float64(b[i])
    if metric == COSINE:
        return 1.0 - s
    return -s


@numba.njit(cache=True, inline="always")
def key_less(d1, i1, d2, i2):
    return d1 < d2 or (d1 == d2 and i1 < i2)


# -- binary heaps over parallel (dist, id) arrays -----------------------------


@numba.njit(cache=True)
def _min_push(hd, hi, size, d, v):
    pos = size
    hd[pos] = d
    hi[pos] = v
    while pos > 0:
        parent = (pos - 1) >> 1
        if key_less(hd[pos], hi[pos], hd[parent], hi[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            pos = parent
        else:
            break
    return size + 1


@numba.njit(cache=True)
def _min_pop(hd, hi, size):
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and key_less(hd[right], hi[right], hd[left], hi[left]):
            best = right
        if key_less(hd[best], hi[best], hd[pos], hi[pos]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            pos = best
        else:
            break
    return size


@numba.njit(cache=True)
def _max_push(hd, hi, size, d, v):
    pos = size
    hd[pos] = d
    hi[pos] = v
    while pos > 0:
        parent = (pos - 1) >> 1
        if key_less(hd[parent], hi[parent], hd[pos], hi[pos]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            pos = parent
        else:
            break
    return size + 1


@numba.njit(cache=True)
def _max_pop(hd, hi, size):
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and key_less(hd[left], hi[left], hd[right], hi[right]):
            best = right
        if key_less(hd[pos], hi[pos], hd[best], hi[best]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            pos = best
        else:
            break
    return size


@numba.njit(cache=True)
def _grow(hd, hi, size):
    nd = np.empty(hd.shape[0] * 2, dtype=hd.dtype)
    ni = np.empty(hi.shape[0] * 2, dtype=hi.dtype)
    nd[:size] = hd[:size]
    ni[:size] = hi[:size]
    return nd, ni


# -- greedy (beam) search -------------------------------------------------------


@numba.njit(cache=True)
def beam_search(data, metric, base_adj, base_deg, extra_adj, extra_deg,
                q, ep, L, stamps, epoch, capture):
    """Best-first search with a result list bounded by ``L``.

    Returns the final result list sorted ascending (tombstones included),
    the distance-computation count and, when ``capture`` is set, every
    evaluated vertex in evaluation order.
    """
    n = data.shape[0]
    rd = np.empty(L + 1, dtype=np.float64)
    ri = np.empty(L + 1, dtype=np.int64)
    cap = 64
    cd = np.empty(cap, dtype=np.float64)
    ci = np.empty(cap, dtype=np.int64)
    vcap = 64 if capture else 1
    vd = np.empty(vcap, dtype=np.float64)
    vi = np.empty(vcap, dtype=np.int64)
    nvis = 0

    d0 = dist(data[ep], q, metric)
    ndc = 1
    stamps[ep] = epoch
    if capture:
        vd[0] = d0
        vi[0] = ep
        nvis = 1
    rsize = _max_push(rd, ri, 0, d0, ep)
    csize = _min_push(cd, ci, 0, d0, ep)

    while csize > 0:
        ud = cd[0]
        u = ci[0]
        csize = _min_pop(cd, ci, csize)
        dmax = rd[0]
        imax = ri[0]
        if key_less(dmax, imax, ud, u):
            break
        for part in range(2):
            if part == 0:
                deg = base_deg[u]
            else:
                deg = extra_deg[u]
            for e in range(deg):
                if part == 0:
                    v = base_adj[u, e]
                else:
                    v = extra_adj[u, e]
                if v < 0 or v >= n or stamps[v] == epoch:
                    continue
                stamps[v] = epoch
                dv = dist(data[v], q, metric)
                ndc += 1
                if capture:
                    if nvis == vd.shape[0]:
                        vd, vi = _grow(vd, vi, nvis)
                    vd[nvis] = dv
                    vi[nvis] = v
                    nvis += 1
                if rsize < L or key_less(dv, v, dmax, imax):
                    rsize = _max_push(rd, ri, rsize, dv, v)
                    if csize == cd.shape[0]:
                        cd, ci = _grow(cd, ci, csize)
                    csize = _min_push(cd, ci, csize, dv, v)
                    while rsize > L:
                        rsize = _max_pop(rd, ri, rsize)
                    dmax = rd[0]
                    imax = ri[0]

    out_d = np.empty(rsize, dtype=np.float64)
    out_i = np.empty(rsize, dtype=np.int64)
    m = rsize
    while m > 0:
        out_d[m - 1] = rd[0]
        out_i[m - 1] = ri[0]
        m = _max_pop(rd, ri, m)
    return out_i, out_d, ndc, vi[:nvis], vd[:nvis]


# -- neighbor selection ----------------------------------------------------------


@numba.njit(cache=True)
def rng_select(data, metric, cand_ids, cand_dists, limit):
    """HNSW heuristic: walk candidates in ascending order and keep ``v`` iff it
    is strictly closer to the anchor than to every already kept vertex."""
    kept = np.empty(min(limit, cand_ids.shape[0]), dtype=np.int64)
    nk = 0
    for c in range(cand_ids.shape[0]):
        if nk >= limit:
            break
        v = cand_ids[c]
        dv = cand_dists[c]
        ok = True
        for r in range(nk):
            if dist(data[v], data[kept[r]], metric) <= dv:
                ok = False
                break
        if ok:
            kept[nk] = v
            nk += 1
    return kept[:nk]


@numba.njit(cache=True)
def _sort_by_key(ids, ds):
    # insertion sort: candidate lists here are short (<= M + 1)
    for a in range(1, ids.shape[0]):
        vi = ids[a]
        vd = ds[a]
        b = a - 1
        while b >= 0 and key_less(vd, vi, ds[b], ids[b]):
            ids[b + 1] = ids[b]
            ds[b + 1] = ds[b]
            b -= 1
        ids[b + 1] = vi
        ds[b + 1] = vd


@numba.njit(cache=True)
def insert_vertex(data, metric, base_adj, base_deg, extra_adj, extra_deg,
                  tomb, p, ep, M, efc, stamps, epoch):
    """Link vertex ``p`` into the base layer. ``p`` must currently have no
    base edges; ``ep`` must differ from ``p``."""
    ids, ds, _, _, _ = beam_search(data, metric, base_adj, base_deg, extra_adj,
                                   extra_deg, data[p], ep, efc, stamps, epoch,
                                   False)
    # drop p itself should it have been reached through an existing edge
    keep = ids != p
    for c in range(ids.shape[0]):
        if tomb[ids[c]]:
            keep[c] = False
    ids = ids[keep]
    ds = ds[keep]
    sel = rng_select(data, metric, ids, ds, M)
    for e in range(sel.shape[0]):
        base_adj[p, e] = sel[e]
    base_deg[p] = sel.shape[0]

    for e in range(sel.shape[0]):
        v = sel[e]
        dv = base_deg[v]
        dup = False
        for x in range(dv):
            if base_adj[v, x] == p:
                dup = True
                break
        if dup:
            continue
        if dv < M:
            base_adj[v, dv] = p
            base_deg[v] = dv + 1
            continue
        cids = np.empty(dv + 1, dtype=np.int64)
        cds = np.empty(dv + 1, dtype=np.float64)
        for x in range(dv):
            cids[x] = base_adj[v, x]
            cds[x] = dist(data[v], data[cids[x]], metric)
        cids[dv] = p
        cds[dv] = dist(data[v], data[p], metric)
        _sort_by_key(cids, cds)
        pruned = rng_select(data, metric, cids, cds, M)
        for x in range(pruned.shape[0]):
            base_adj[v, x] = pruned[x]
        for x in range(pruned.shape[0], M):
            base_adj[v, x] = -1
        base_deg[v] = pruned.shape[0]
    return sel.shape[0]


# -- neighboring graph and escape hardness --------------------------------------


@numba.njit(cache=True)
def induced_adjacency(ids, base_adj, base_deg, extra_adj, extra_deg, rank_of):
    """Dense boolean adjacency of the subgraph induced by ``ids`` (rank order).

    ``rank_of`` is scratch of length n filled with -1; it is restored before
    returning."""
    S = ids.shape[0]
    adj = np.zeros((S, S), dtype=np.bool_)
    for r in range(S):
        rank_of[ids[r]] = r
    for r in range(S):
        u = ids[r]
        for e in range(base_deg[u]):
            t = rank_of[base_adj[u, e]]
            if t >= 0 and t != r:
                adj[r, t] = True
        for e in range(extra_deg[u]):
            t = rank_of[extra_adj[u, e]]
            if t >= 0 and t != r:
                adj[r, t] = True
    for r in range(S):
        rank_of[ids[r]] = -1
    return adj


@numba.njit(cache=True)
def hardness_closure(adj, nq):
    """Escape hardness of every ordered pair among the first ``nq`` ranks.

    Transitive closure over bit rows, adding one vertex (in rank order) per
    outer step; a pair first becoming reachable at step ``h`` gets
    ``max(i, j, h)`` in 1-based ranks."""
    S = adj.shape[0]
    W = (S + 63) >> 6
    f = np.zeros((S, W), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(S):
        f[i, i >> 6] |= one << np.uint64(i & 63)
        for j in range(S):
            if adj[i, j]:
                f[i, j >> 6] |= one << np.uint64(j & 63)

    H = np.full((nq, nq), INF_EH, dtype=np.int64)
    remaining = 0
    for i in range(nq):
        for j in range(nq):
            if (f[i, j >> 6] >> np.uint64(j & 63)) & one:
                H[i, j] = max(i, j) + 1
            else:
                remaining += 1

    wq = (nq + 63) >> 6
    for h in range(S):
        if remaining == 0:
            break
        hw = h >> 6
        hb = np.uint64(h & 63)
        for i in range(S):
            if not ((f[i, hw] >> hb) & one):
                continue
            for w in range(W):
                old = f[i, w]
                new = old | f[h, w]
                if new != old:
                    f[i, w] = new
                    if i < nq and w < wq:
                        changed = new & ~old
                        base = w << 6
                        while changed:
                            b = 0
                            c = changed
                            while not (c & one):
                                c >>= one
                                b += 1
                            changed &= changed - one
                            j = base + b
                            if j < nq:
                                H[i, j] = max(max(i, j), h) + 1
                                remaining -= 1
    return H


@numba.njit(cache=True)
def dist_many(rows, q, metric):
    out = np.empty(rows.shape[0], dtype=np.float64)
    for i in range(rows.shape[0]):
        out[i] = dist(rows[i], q, metric)
    return out


@numba.njit(cache=True)
def dist_pairs(data, a_ids, b_ids, metric):
    out = np.empty(a_ids.shape[0], dtype=np.float64)
    for i in range(a_ids.shape[0]):
        out[i] = dist(data[a_ids[i]], data[b_ids[i]], metric)
    return out
