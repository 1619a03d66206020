"""Hot numeric kernels.

Every kernel is written as a plain nopython-compatible function and compiled
with numba's ``@njit`` unless the environment variable ``MSS_NO_NUMBA`` is set
to a non-empty value, in which case the uncompiled pure-Python/numpy path runs.
Both paths execute the exact same statements in the same order, so results are
bit-identical; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import math
import os

import numpy as np

USE_NUMBA = not os.environ.get("MSS_NO_NUMBA")

if USE_NUMBA:
    from numba import njit
else:  # fallback: leave the functions uncompiled

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def triangle_counts(indptr, indices):
    """Per-node triangle counts for a CSR adjacency with sorted neighbor lists.

    Each triangle is counted once per incident node.
    """
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if v <= u:
                continue
            # merge-intersect adjacency lists of u and v
            i = indptr[u]
            j = indptr[v]
            while i < indptr[u + 1] and j < indptr[v + 1]:
                a = indices[i]
                b = indices[j]
                if a == b:
                    out[a] += 1
                    out[u] += 1
                    out[v] += 1
                    i += 1
                    j += 1
                elif a < b:
                    i += 1
                else:
                    j += 1
    # every triangle u<v<w was found 3 times (once per edge), so each node's
    # count is 3x too large for its own incident triangles
    for u in range(n):
        out[u] //= 3
    return out


@njit(cache=True)
def dbow_epoch(doc_vecs, tok_vecs, pair_docs, pair_toks, order, negatives, lr):
    """One epoch of distributed-bag-of-words training with negative sampling.

    ``pair_docs[i]``/``pair_toks[i]`` is one (document, token) example;
    ``order`` permutes the examples, ``negatives`` holds the pre-drawn negative
    token ids per example (shape: examples x n_neg). Updates are sequential,
    so the epoch is deterministic given its inputs.
    """
    dim = doc_vecs.shape[1]
    n_neg = negatives.shape[1]
    for idx in range(order.shape[0]):
        ex = order[idx]
        d = pair_docs[ex]
        for s in range(n_neg + 1):
            if s == 0:
                t = pair_toks[ex]
                label = 1.0
            else:
                t = negatives[ex, s - 1]
                label = 0.0
            dot = 0.0
            for c in range(dim):
                dot += doc_vecs[d, c] * tok_vecs[t, c]
            if dot > 30.0:
                pred = 1.0
            elif dot < -30.0:
                pred = 0.0
            else:
                pred = 1.0 / (1.0 + math.exp(-dot))
            g = (label - pred) * lr
            for c in range(dim):
                grad_d = g * tok_vecs[t, c]
                tok_vecs[t, c] += g * doc_vecs[d, c]
                doc_vecs[d, c] += grad_d


@njit(cache=True)
def fr_step(pos, src, dst, k, temp):
    """One Fruchterman-Reingold iteration with displacement capped at temp."""
    n = pos.shape[0]
    disp = np.zeros((n, 2), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dist = math.sqrt(dx * dx + dy * dy)
            if dist < 1e-9:
                dist = 1e-9
                dx = 1e-9
            rep = k * k / dist
            fx = dx / dist * rep
            fy = dy / dist * rep
            disp[i, 0] += fx
            disp[i, 1] += fy
            disp[j, 0] -= fx
            disp[j, 1] -= fy
    for e in range(src.shape[0]):
        u = src[e]
        v = dst[e]
        dx = pos[u, 0] - pos[v, 0]
        dy = pos[u, 1] - pos[v, 1]
        dist = math.sqrt(dx * dx + dy * dy)
        if dist < 1e-9:
            continue
        att = dist * dist / k
        fx = dx / dist * att
        fy = dy / dist * att
        disp[u, 0] -= fx
        disp[u, 1] -= fy
        disp[v, 0] += fx
        disp[v, 1] += fy
    for i in range(n):
        dx = disp[i, 0]
        dy = disp[i, 1]
        dlen = math.sqrt(dx * dx + dy * dy)
        if dlen < 1e-12:
            continue
        step = dlen if dlen < temp else temp
        pos[i, 0] += dx / dlen * step
        pos[i, 1] += dy / dlen * step


@njit(cache=True)
def _row_dist(vecs, i, query):
    acc = 0.0
    for c in range(vecs.shape[1]):
        d = vecs[i, c] - query[c]
        acc += d * d
    return acc


@njit(cache=True)
def _row_row_dist(vecs, i, j):
    acc = 0.0
    for c in range(vecs.shape[1]):
        d = vecs[i, c] - vecs[j, c]
        acc += d * d
    return acc


@njit(cache=True)
def _heap_push(hd, hs, size, d, s):
    hd[size] = d
    hs[size] = s
    i = size
    while i > 0:
        p = (i - 1) // 2
        if hd[p] <= hd[i]:
            break
        hd[p], hd[i] = hd[i], hd[p]
        hs[p], hs[i] = hs[i], hs[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(hd, hs, size):
    size -= 1
    hd[0] = hd[size]
    hs[0] = hs[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        small = i
        if l < size and hd[l] < hd[small]:
            small = l
        if r < size and hd[r] < hd[small]:
            small = r
        if small == i:
            break
        hd[small], hd[i] = hd[i], hd[small]
        hs[small], hs[i] = hs[i], hs[small]
        i = small
    return size


@njit(cache=True)
def hnsw_search_layer(vecs, neigh, cnt, layer, query, ep, ef, visited, stamp):
    """Best-first beam search on one layer; returns (dists, slots) ascending.

    ``visited`` is a reusable stamp array so repeated searches avoid clearing.
    """
    n = vecs.shape[0]
    cd = np.empty(n, dtype=np.float64)
    cs = np.empty(n, dtype=np.int32)
    rd = np.empty(ef + 1, dtype=np.float64)
    rs = np.empty(ef + 1, dtype=np.int32)
    csize = 0
    rsize = 0
    d0 = _row_dist(vecs, ep, query)
    csize = _heap_push(cd, cs, csize, d0, ep)
    rsize = _heap_push(rd, rs, rsize, -d0, ep)
    visited[ep] = stamp
    while csize > 0:
        d = cd[0]
        s = cs[0]
        csize = _heap_pop(cd, cs, csize)
        if rsize >= ef and d > -rd[0]:
            break
        for idx in range(cnt[layer, s]):
            nb = neigh[layer, s, idx]
            if visited[nb] == stamp:
                continue
            visited[nb] = stamp
            dd = _row_dist(vecs, nb, query)
            if rsize < ef or dd < -rd[0]:
                csize = _heap_push(cd, cs, csize, dd, nb)
                rsize = _heap_push(rd, rs, rsize, -dd, nb)
                if rsize > ef:
                    rsize = _heap_pop(rd, rs, rsize)
    out_d = np.empty(rsize, dtype=np.float64)
    out_s = np.empty(rsize, dtype=np.int32)
    for i in range(rsize - 1, -1, -1):
        out_d[i] = -rd[0]
        out_s[i] = rs[0]
        rsize = _heap_pop(rd, rs, rsize)
    return out_d, out_s


@njit(cache=True)
def _hnsw_select(vecs, cand_d, cand_s, cap, out):
    """Diversity-preserving neighbor selection into ``out``; returns count.

    A candidate is kept only if it is closer to the base point than to every
    already-kept neighbor; skipped candidates backfill unused capacity.
    """
    n_cand = cand_s.shape[0]
    skipped = np.empty(n_cand, dtype=np.int32)
    nk = 0
    ns = 0
    for i in range(n_cand):
        if nk >= cap:
            break
        ok = True
        for j in range(nk):
            if _row_row_dist(vecs, cand_s[i], out[j]) < cand_d[i]:
                ok = False
                break
        if ok:
            out[nk] = cand_s[i]
            nk += 1
        else:
            skipped[ns] = cand_s[i]
            ns += 1
    for i in range(ns):
        if nk >= cap:
            break
        out[nk] = skipped[i]
        nk += 1
    return nk


@njit(cache=True)
def _greedy_descent(vecs, neigh, cnt, layer, query, ep):
    cur = ep
    cur_d = _row_dist(vecs, cur, query)
    improved = True
    while improved:
        improved = False
        for idx in range(cnt[layer, cur]):
            nb = neigh[layer, cur, idx]
            d = _row_dist(vecs, nb, query)
            if d < cur_d:
                cur = nb
                cur_d = d
                improved = True
    return cur


@njit(cache=True)
def hnsw_build(vecs, node_levels, m, ef_construction):
    """Insert all points into a layered small-world graph.

    Layer 0 keeps up to 2m links per node, upper layers up to m. Returns the
    neighbor tensor, per-layer link counts, and the entry point.
    """
    n = vecs.shape[0]
    max_level = 0
    for i in range(n):
        if node_levels[i] > max_level:
            max_level = node_levels[i]
    cap0 = 2 * m
    neigh = np.full((max_level + 1, n, cap0), -1, dtype=np.int32)
    cnt = np.zeros((max_level + 1, n), dtype=np.int32)
    visited = np.zeros(n, dtype=np.int64)
    stamp = 0
    ep = 0
    tmp_links_d = np.empty(cap0 + 1, dtype=np.float64)
    tmp_links_s = np.empty(cap0 + 1, dtype=np.int32)
    sel = np.empty(cap0, dtype=np.int32)
    for node in range(1, n):
        query = vecs[node]
        node_level = node_levels[node]
        top = node_levels[ep]
        cur = ep
        for layer in range(top, node_level, -1):
            cur = _greedy_descent(vecs, neigh, cnt, layer, query, cur)
        start = top if top < node_level else node_level
        for layer in range(start, -1, -1):
            stamp += 1
            cand_d, cand_s = hnsw_search_layer(
                vecs, neigh, cnt, layer, query, cur, ef_construction, visited, stamp)
            cap = m if layer > 0 else cap0
            nk = _hnsw_select(vecs, cand_d, cand_s, m, sel)
            for i in range(nk):
                neigh[layer, node, i] = sel[i]
            cnt[layer, node] = nk
            for i in range(nk):
                other = sel[i]
                c = cnt[layer, other]
                if c < cap:
                    neigh[layer, other, c] = node
                    cnt[layer, other] = c + 1
                else:
                    # re-select among existing links plus the new node
                    for j in range(c):
                        tmp_links_s[j] = neigh[layer, other, j]
                        tmp_links_d[j] = _row_row_dist(vecs, other, neigh[layer, other, j])
                    tmp_links_s[c] = node
                    tmp_links_d[c] = _row_row_dist(vecs, other, node)
                    order = np.argsort(tmp_links_d[: c + 1], kind="mergesort")
                    sd = tmp_links_d[: c + 1][order]
                    ss = tmp_links_s[: c + 1][order]
                    nk2 = _hnsw_select(vecs, sd, ss, cap, neigh[layer, other])
                    cnt[layer, other] = nk2
            cur = cand_s[0]
        if node_level > node_levels[ep]:
            ep = node
    return neigh, cnt, ep


@njit(cache=True)
def euclidean_sq_batch(mat, vec):
    """Squared euclidean distance from vec to every row of mat."""
    n = mat.shape[0]
    dim = mat.shape[1]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for c in range(dim):
            d = mat[i, c] - vec[c]
            acc += d * d
        out[i] = acc
    return out
