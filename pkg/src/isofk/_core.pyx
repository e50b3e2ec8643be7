# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: heat-bath sweep, cluster labelling, kink propagation.

Semantics are identical to :mod:`isofk._pycore`; both consume the same
pre-drawn uniforms so their outputs agree bit for bit.
"""

import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


cdef bint _connected(i64 u, i64 v, i64 skip,
                     const i64[:] indptr, const i64[:] nbr, const i64[:] eid,
                     const u8[:] state, i64[:] mark, i64 stamp,
                     i64[:] qa, i64[:] qb) noexcept nogil:
    # interleaved search from both ends; stops as soon as one side is exhausted
    cdef i64 ha = 0, ta = 0, hb = 0, tb = 0
    cdef i64 x, k, y, e
    if u == v:
        return True
    mark[u] = stamp
    mark[v] = stamp + 1
    qa[ta] = u
    ta += 1
    qb[tb] = v
    tb += 1
    while ha < ta and hb < tb:
        x = qa[ha]
        ha += 1
        for k in range(indptr[x], indptr[x + 1]):
            e = eid[k]
            if e == skip or state[e] == 0:
                continue
            y = nbr[k]
            if mark[y] == stamp + 1:
                return True
            if mark[y] != stamp:
                mark[y] = stamp
                qa[ta] = y
                ta += 1
        x = qb[hb]
        hb += 1
        for k in range(indptr[x], indptr[x + 1]):
            e = eid[k]
            if e == skip or state[e] == 0:
                continue
            y = nbr[k]
            if mark[y] == stamp:
                return True
            if mark[y] != stamp + 1:
                mark[y] = stamp + 1
                qb[tb] = y
                tb += 1
    return False


def heat_bath_sweep(const i64[:] indptr, const i64[:] nbr, const i64[:] eid,
                    const i64[:] eu, const i64[:] ev, u8[:] state,
                    const double[:] p, double q, const double[:] uniforms,
                    const i64[:] order):
    """Resample each edge in ``order`` from its conditional law.

    ``state`` covers real edges followed by permanently open wiring edges;
    only edges listed in ``order`` are touched.  Returns the number of
    connectivity queries answered positively.
    """
    cdef i64 n = indptr.shape[0] - 1
    cdef i64[:] mark = np.zeros(n, dtype=np.int64)
    cdef i64[:] qa = np.empty(n, dtype=np.int64)
    cdef i64[:] qb = np.empty(n, dtype=np.int64)
    cdef i64 stamp = 1, t, e, hits = 0
    cdef double pe, po
    cdef bint conn
    with nogil:
        for t in range(order.shape[0]):
            e = order[t]
            pe = p[e]
            if q == 1.0:
                po = pe
            else:
                conn = _connected(eu[e], ev[e], e, indptr, nbr, eid, state, mark, stamp, qa, qb)
                stamp += 2
                if conn:
                    hits += 1
                    po = pe
                else:
                    po = pe / (pe + q * (1.0 - pe))
            state[e] = 1 if uniforms[t] < po else 0
    return hits


def connected(const i64[:] indptr, const i64[:] nbr, const i64[:] eid,
              const u8[:] state, i64 u, i64 v, i64 skip=-1):
    cdef i64 n = indptr.shape[0] - 1
    cdef i64[:] mark = np.zeros(n, dtype=np.int64)
    cdef i64[:] qa = np.empty(n, dtype=np.int64)
    cdef i64[:] qb = np.empty(n, dtype=np.int64)
    return bool(_connected(u, v, skip, indptr, nbr, eid, state, mark, 1, qa, qb))


cdef inline i64 _find(i64[:] parent, i64 x) noexcept nogil:
    cdef i64 r = x, nxt
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


def label_clusters(i64 n, const i64[:] eu, const i64[:] ev, const u8[:] state):
    """Component labels 0..k-1, numbered by first vertex id of each component."""
    cdef i64[:] parent = np.arange(n, dtype=np.int64)
    cdef i64 e, a, b, x, r, nlab = 0
    out = np.empty(n, dtype=np.int64)
    cdef i64[:] lab = out
    cdef i64[:] rootlab = np.full(n, -1, dtype=np.int64)
    with nogil:
        for e in range(eu.shape[0]):
            if state[e]:
                a = _find(parent, eu[e])
                b = _find(parent, ev[e])
                if a != b:
                    if a < b:
                        parent[b] = a
                    else:
                        parent[a] = b
        for x in range(n):
            r = _find(parent, x)
            if rootlab[r] < 0:
                rootlab[r] = nlab
                nlab += 1
            lab[x] = rootlab[r]
    return out


def propagate_kink(u8[:] state, const i64[:] lower, const i64[:] upper,
                   const u8[:] tables, const double[:, :, :] cumulative,
                   int kink, const double[:] uniforms):
    """Carry the exchanged crossing across the columns.

    Step ``s`` reads (kink, lower[s], upper[s]) as the 3-bit input
    ``kink*4 + lower*2 + upper`` and samples the output from
    ``cumulative[tables[s], input]``; the output uses the same bit layout.
    Returns the final kink state.
    """
    cdef i64 s, j, inp, out, nstep = lower.shape[0]
    cdef double u
    with nogil:
        for s in range(nstep):
            inp = kink * 4 + state[lower[s]] * 2 + state[upper[s]]
            u = uniforms[s]
            out = 7
            for j in range(8):
                if u < cumulative[tables[s], inp, j]:
                    out = j
                    break
            kink = (out >> 2) & 1
            state[lower[s]] = (out >> 1) & 1
            state[upper[s]] = out & 1
    return kink
