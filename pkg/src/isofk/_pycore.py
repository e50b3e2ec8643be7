"""Pure-Python twin of :mod:`isofk._core`, used when the extension is absent."""

from __future__ import annotations

from collections import deque

import numpy as np


def _connected(u, v, skip, indptr, nbr, eid, state):
    if u == v:
        return True
    side = {u: 0, v: 1}
    qa, qb = deque([u]), deque([v])
    queues = (qa, qb)
    while qa and qb:
        for s in (0, 1):
            x = queues[s].popleft()
            for k in range(indptr[x], indptr[x + 1]):
                e = eid[k]
                if e == skip or not state[e]:
                    continue
                y = nbr[k]
                prev = side.get(y)
                if prev is None:
                    side[y] = s
                    queues[s].append(y)
                elif prev != s:
                    return True
    return False


def heat_bath_sweep(indptr, nbr, eid, eu, ev, state, p, q, uniforms, order):
    indptr = indptr.tolist()
    nbr = nbr.tolist()
    eid = eid.tolist()
    eu = eu.tolist()
    ev = ev.tolist()
    hits = 0
    for t, e in enumerate(order.tolist()):
        pe = float(p[e])
        if q == 1.0:
            po = pe
        elif _connected(eu[e], ev[e], e, indptr, nbr, eid, state):
            hits += 1
            po = pe
        else:
            po = pe / (pe + q * (1.0 - pe))
        state[e] = 1 if uniforms[t] < po else 0
    return hits


def connected(indptr, nbr, eid, state, u, v, skip=-1):
    return _connected(int(u), int(v), int(skip), indptr.tolist(), nbr.tolist(), eid.tolist(),
                      state)


def label_clusters(n, eu, ev, state):
    parent = list(range(n))

    def find(x):
        r = x
        while parent[r] != r:
            r = parent[r]
        while parent[x] != r:
            parent[x], x = r, parent[x]
        return r

    for a, b, s in zip(eu.tolist(), ev.tolist(), state[: len(eu)].tolist()):
        if s:
            ra, rb = find(a), find(b)
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    out = np.empty(n, dtype=np.int64)
    rootlab: dict[int, int] = {}
    for x in range(n):
        r = find(x)
        if r not in rootlab:
            rootlab[r] = len(rootlab)
        out[x] = rootlab[r]
    return out


def propagate_kink(state, lower, upper, tables, cumulative, kink, uniforms):
    for s in range(len(lower)):
        lo, up = int(lower[s]), int(upper[s])
        inp = kink * 4 + int(state[lo]) * 2 + int(state[up])
        row = cumulative[int(tables[s]), inp]
        u = uniforms[s]
        out = 7
        for j in range(8):
            if u < row[j]:
                out = j
                break
        kink = (out >> 2) & 1
        state[lo] = (out >> 1) & 1
        state[up] = out & 1
    return kink
