"""numba kernels for the hot loops: exhaustive enumeration, double edge
swaps and triangle counting.  Callers own all randomness; the kernels are
deterministic functions of their inputs.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


# ---------------------------------------------------------------------------
# enumeration of labeled graphs with a prescribed degree sequence


# recursive dispatch does not survive numba's on-disk cache
@njit
def _enum_rec(i, n, deficit, adj, forb, emask, eidx, copies, track, freq, hist):
    while i < n and deficit[i] == 0:
        i += 1
    if i == n:
        if track:
            for b in range(freq.shape[0]):
                if (emask >> b) & 1:
                    freq[b] += 1
        if copies.shape[0] > 0:
            cnt = 0
            for c in range(copies.shape[0]):
                if (emask & copies[c]) == copies[c]:
                    cnt += 1
            hist[cnt] += 1
        return np.int64(1)
    k = deficit[i]
    cand = np.int64(0)
    for j in range(i + 1, n):
        if deficit[j] > 0 and not (adj[i] >> j) & 1 and not (forb[i] >> j) & 1:
            cand |= np.int64(1) << j
    if popcount(cand) < k:
        return np.int64(0)
    total = np.int64(0)
    s = cand
    while s:
        if popcount(s) == k:
            added = np.int64(0)
            for j in range(i + 1, n):
                if (s >> j) & 1:
                    adj[i] |= np.int64(1) << j
                    adj[j] |= np.int64(1) << i
                    deficit[j] -= 1
                    added |= np.int64(1) << eidx[i, j]
            deficit[i] = 0
            # forward feasibility: every open vertex needs enough open partners
            active = np.int64(0)
            for j in range(i + 1, n):
                if deficit[j] > 0:
                    active |= np.int64(1) << j
            ok = True
            for j in range(i + 1, n):
                if deficit[j] > 0:
                    avail = active & ~adj[j] & ~forb[j] & ~(np.int64(1) << j)
                    if popcount(avail) < deficit[j]:
                        ok = False
                        break
            if ok:
                total += _enum_rec(i + 1, n, deficit, adj, forb, emask | added, eidx, copies, track, freq, hist)
            deficit[i] = k
            for j in range(i + 1, n):
                if (s >> j) & 1:
                    adj[i] &= ~(np.int64(1) << j)
                    adj[j] &= ~(np.int64(1) << i)
                    deficit[j] += 1
        s = (s - 1) & cand
    return total


@njit
def enum_stats(n, deficit, adj, forb, emask, eidx, copies, track, freq, hist):
    """Count completions of (adj, deficit) avoiding forb.

    ``freq[e]`` accumulates how many completions contain edge e (when
    ``track``); ``hist[c]`` how many contain exactly c of the ``copies``
    edge masks.
    """
    return _enum_rec(0, n, deficit.copy(), adj.copy(), forb, emask, eidx, copies, track, freq, hist)


# ---------------------------------------------------------------------------
# double edge swap chain


@njit(cache=True)
def _has(nbr, deg, u, w):
    for k in range(deg[u]):
        if nbr[u, k] == w:
            return True
    return False


@njit(cache=True)
def _replace(nbr, deg, u, old, new):
    for k in range(deg[u]):
        if nbr[u, k] == old:
            nbr[u, k] = new
            return


@njit(cache=True)
def _forbidden(keys, n, u, w):
    if keys.shape[0] == 0:
        return False
    if u > w:
        u, w = w, u
    key = u * n + w
    pos = np.searchsorted(keys, key)
    return pos < keys.shape[0] and keys[pos] == key


@njit(cache=True)
def swap_steps(nbr, deg, edges, forb_keys, n, r1, r2, rbit):
    """Lazy double edge swaps on ``edges`` (the movable edges only).

    Attempt t picks movable edges r1[t], r2[t] and orientation rbit[t];
    (a,b),(c,e) -> (a,c),(b,e).  Rejected proposals leave the state
    unchanged, which keeps the chain symmetric.
    """
    accepted = 0
    for t in range(r1.shape[0]):
        i = r1[t]
        j = r2[t]
        if i == j:
            continue
        a = edges[i, 0]
        b = edges[i, 1]
        if rbit[t]:
            c = edges[j, 1]
            e = edges[j, 0]
        else:
            c = edges[j, 0]
            e = edges[j, 1]
        if a == c or b == e:
            continue
        if _has(nbr, deg, a, c) or _has(nbr, deg, b, e):
            continue
        if _forbidden(forb_keys, n, a, c) or _forbidden(forb_keys, n, b, e):
            continue
        _replace(nbr, deg, a, b, c)
        _replace(nbr, deg, b, a, e)
        _replace(nbr, deg, c, e, a)
        _replace(nbr, deg, e, c, b)
        edges[i, 0] = a
        edges[i, 1] = c
        edges[j, 0] = b
        edges[j, 1] = e
        accepted += 1
    return accepted


@njit(cache=True)
def count_triangles(nbr, deg):
    n = deg.shape[0]
    mark = np.zeros(n, dtype=np.bool_)
    total = 0
    for u in range(n):
        for k in range(deg[u]):
            mark[nbr[u, k]] = True
        for k in range(deg[u]):
            v = nbr[u, k]
            if v <= u:
                continue
            for m in range(deg[v]):
                w = nbr[v, m]
                if w > v and mark[w]:
                    total += 1
        for k in range(deg[u]):
            mark[nbr[u, k]] = False
    return total
