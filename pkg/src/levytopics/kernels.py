"""Inner loops shared by graph construction, seed selection and topic growth.

All kernels take and return flat numpy arrays (CSR style) so they compile
under numba ``nopython`` mode. See :mod:`levytopics._accel` for the switch.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit

# thresholds are tracked in integer tenths: 10 == 1.0, 1 == 0.1
TH_START = 10
TH_FLOOR = 1
_FLOOR_EPS = 1e-9


@njit
def topk_rows(indptr, indices, data, k):
    """Keep the ``k`` largest positive off-diagonal entries of every row.

    Rows of the output are ordered by weight descending, ties by lower column.
    """
    n = indptr.shape[0] - 1
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        c = 0
        for p in range(indptr[i], indptr[i + 1]):
            if indices[p] != i and data[p] > 0.0:
                c += 1
        counts[i] = min(c, k)
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        out_ptr[i + 1] = out_ptr[i] + counts[i]
    out_idx = np.empty(out_ptr[n], dtype=np.int64)
    out_val = np.empty(out_ptr[n], dtype=np.float64)
    for i in range(n):
        if counts[i] == 0:
            continue
        lo = indptr[i]
        hi = indptr[i + 1]
        cols = np.empty(hi - lo, dtype=np.int64)
        vals = np.empty(hi - lo, dtype=np.float64)
        m = 0
        for p in range(lo, hi):
            j = indices[p]
            if j != i and data[p] > 0.0:
                cols[m] = j
                vals[m] = data[p]
                m += 1
        cols = cols[:m]
        vals = vals[:m]
        by_col = np.argsort(cols, kind="mergesort")
        cols = cols[by_col]
        vals = vals[by_col]
        by_val = np.argsort(-vals, kind="mergesort")
        base = out_ptr[i]
        for r in range(counts[i]):
            out_idx[base + r] = cols[by_val[r]]
            out_val[base + r] = vals[by_val[r]]
    return out_ptr, out_idx, out_val


def topk_rows_numpy(indptr, indices, data, k):
    """Vectorised equivalent of :func:`topk_rows` (no numba needed)."""
    n = len(indptr) - 1
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    keep = (indices != rows) & (data > 0.0)
    rows, cols, vals = rows[keep], np.asarray(indices)[keep].astype(np.int64), np.asarray(data)[keep]
    order = np.lexsort((cols, -vals, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    starts = np.searchsorted(rows, np.arange(n), side="left")
    rank = np.arange(len(rows)) - starts[rows]
    sel = rank < k
    rows, cols, vals = rows[sel], cols[sel], vals[sel]
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=out_ptr[1:])
    return out_ptr, cols, vals.astype(np.float64)


@njit
def seed_scan(order, indptr, indices, n, d):
    visited = np.zeros(n, dtype=np.bool_)
    seeds = np.empty(n, dtype=np.int64)
    ns = 0
    for x in order:
        if visited[x]:
            continue
        lo = indptr[x]
        hi = min(indptr[x + 1], lo + d)
        free = True
        for p in range(lo, hi):
            if visited[indices[p]]:
                free = False
                break
        if not free:
            continue
        seeds[ns] = x
        ns += 1
        visited[x] = True
        for p in range(lo, hi):
            visited[indices[p]] = True
    return seeds[:ns]


@njit
def grow_stream(n, indptr, indices, weights, rindptr, rindices, rweights, seeds, stream, topk):
    """Explore-exploit topic growth over a node stream.

    Returns
    -------
    add_topic, add_node : int64 arrays
        Every membership event in time order (seeds first).
    snap_topic, snap_size, snap_th : int64 arrays
        Snapshots: topic id, member count at emission and threshold in tenths.
    size, th : int64 arrays
        Final member count and threshold (tenths) per topic.
    """
    n_top = seeds.shape[0]
    size = np.ones(n_top, dtype=np.int64)
    esum = np.zeros(n_top, dtype=np.float64)
    ecnt = np.zeros(n_top, dtype=np.int64)
    th = np.full(n_top, TH_START, dtype=np.int64)

    node_topics = np.full((n, topk), -1, dtype=np.int64)
    node_ntop = np.zeros(n, dtype=np.int64)

    cap = n_top + stream.shape[0] * topk
    add_topic = np.empty(cap, dtype=np.int64)
    add_node = np.empty(cap, dtype=np.int64)
    n_add = 0
    snap_topic = np.empty(n_top * TH_START, dtype=np.int64)
    snap_size = np.empty(n_top * TH_START, dtype=np.int64)
    snap_th = np.empty(n_top * TH_START, dtype=np.int64)
    n_snap = 0

    for t in range(n_top):
        s = seeds[t]
        node_topics[s, 0] = t
        node_ntop[s] = 1
        add_topic[n_add] = t
        add_node[n_add] = s
        n_add += 1

    acc = np.zeros(n_top, dtype=np.float64)
    cnt = np.zeros(n_top, dtype=np.int64)
    mark = np.zeros(n_top, dtype=np.bool_)
    touched = np.empty(n_top, dtype=np.int64)
    score = np.zeros(n_top, dtype=np.float64)
    chosen = np.empty(topk, dtype=np.int64)

    for x in stream:
        n_touch = 0
        for p in range(indptr[x], indptr[x + 1]):
            m = indices[p]
            for q in range(node_ntop[m]):
                t = node_topics[m, q]
                if not mark[t]:
                    mark[t] = True
                    touched[n_touch] = t
                    n_touch += 1
                acc[t] += weights[p]
                cnt[t] += 1
        for p in range(rindptr[x], rindptr[x + 1]):
            m = rindices[p]
            for q in range(node_ntop[m]):
                t = node_topics[m, q]
                if not mark[t]:
                    mark[t] = True
                    touched[n_touch] = t
                    n_touch += 1
                acc[t] += rweights[p]
                cnt[t] += 1

        for r in range(n_touch):
            t = touched[r]
            if size[t] == 1:
                avg = 1.0
            elif ecnt[t] > 0:
                avg = esum[t] / ecnt[t]
            else:
                avg = 0.0
            score[t] = (acc[t] / size[t]) / avg if avg > 0.0 else 0.0

        # topK by score, ties to the earlier-created (lower id) topic
        n_chosen = 0
        for _ in range(topk):
            best = -1
            for r in range(n_touch):
                t = touched[r]
                if score[t] <= 0.0:
                    continue
                taken = False
                for c in range(n_chosen):
                    if chosen[c] == t:
                        taken = True
                        break
                if taken:
                    continue
                if best < 0 or score[t] > score[best] or (score[t] == score[best] and t < best):
                    best = t
            if best < 0:
                break
            chosen[n_chosen] = best
            n_chosen += 1

        for c in range(n_chosen):
            t = chosen[c]
            avg_new = (esum[t] + acc[t]) / (ecnt[t] + cnt[t])
            accept = True
            if avg_new < th[t] / 10.0:
                if th[t] <= TH_FLOOR:
                    accept = False
                else:
                    if size[t] >= 2:
                        snap_topic[n_snap] = t
                        snap_size[n_snap] = size[t]
                        snap_th[n_snap] = th[t]
                        n_snap += 1
                    nxt = int(np.floor(avg_new * 10.0 + _FLOOR_EPS))
                    if nxt > th[t] - 1:
                        nxt = th[t] - 1
                    if nxt < TH_FLOOR:
                        th[t] = TH_FLOOR
                        accept = False
                    else:
                        th[t] = nxt
            if accept:
                size[t] += 1
                esum[t] += acc[t]
                ecnt[t] += cnt[t]
                node_topics[x, node_ntop[x]] = t
                node_ntop[x] += 1
                add_topic[n_add] = t
                add_node[n_add] = x
                n_add += 1

        for r in range(n_touch):
            t = touched[r]
            acc[t] = 0.0
            cnt[t] = 0
            mark[t] = False
            score[t] = 0.0

    return (
        add_topic[:n_add],
        add_node[:n_add],
        snap_topic[:n_snap],
        snap_size[:n_snap],
        snap_th[:n_snap],
        size,
        th,
    )
