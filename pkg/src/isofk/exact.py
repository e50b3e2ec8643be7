"""Brute-force random-cluster measures on small graphs.

Every configuration is enumerated (edge ``e`` is bit ``e`` of the mask) and
weighted by ``q^{k(omega^xi)} prod p_e^{omega_e} (1 - p_e)^{1 - omega_e}`` where
``k`` counts clusters after the boundary wiring ``xi`` is applied.  This is
the reference every sampler and every dynamics kernel is checked against.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

MAX_EDGES = 26
LOG_DOMAIN_EDGES = 20


@dataclass(frozen=True)
class Graph:
    """Plain undirected multigraph given by endpoint arrays."""

    n_vertices: int
    edge_u: tuple[int, ...]
    edge_v: tuple[int, ...]

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        edges = list(edges)
        return cls(n_vertices, tuple(int(a) for a, _ in edges), tuple(int(b) for _, b in edges))


def as_graph(obj) -> Graph:
    """Accept a :class:`Graph`, a lattice, or a topology."""
    if isinstance(obj, Graph):
        return obj
    topo = getattr(obj, "topo", obj)
    return Graph(int(topo.n_vertices), tuple(int(x) for x in topo.edge_u),
                 tuple(int(x) for x in topo.edge_v))


@dataclass(frozen=True)
class BoundaryCondition:
    """Partition of a declared boundary vertex set into wired classes."""

    boundary: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for cls_ in self.classes:
            for v in cls_:
                if v in seen:
                    raise ValueError(f"vertex {v} appears in two wired classes")
                seen.add(v)
        if seen != set(self.boundary):
            raise ValueError("wired classes must cover exactly the boundary set")

    @classmethod
    def free(cls, boundary: Iterable[int] = ()) -> "BoundaryCondition":
        b = tuple(sorted(int(v) for v in boundary))
        return cls(b, tuple((v,) for v in b))

    @classmethod
    def wired(cls, boundary: Iterable[int]) -> "BoundaryCondition":
        b = tuple(sorted(int(v) for v in boundary))
        return cls(b, (b,) if b else ())

    @classmethod
    def mixed(cls, free_part: Iterable[int], wired_part: Iterable[int]) -> "BoundaryCondition":
        """Free on ``free_part``, one wired class on the rest."""
        f = sorted(int(v) for v in free_part)
        w = sorted(set(int(v) for v in wired_part) - set(f))
        classes = tuple((v,) for v in f) + ((tuple(w),) if w else ())
        return cls(tuple(sorted(f + w)), classes)

    @property
    def is_free(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def wired_classes(self) -> list[tuple[int, ...]]:
        return [c for c in self.classes if len(c) > 1]

    def class_of(self) -> dict[int, int]:
        """Vertex -> index of its wired class (only vertices in classes of size > 1)."""
        out = {}
        for i, c in enumerate(self.wired_classes()):
            for v in c:
                out[v] = i
        return out


class _RollbackUnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.history: list[tuple[int, int] | None] = []
        self.components = n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.history.append(None)
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        self.history.append((ra, rb))

    def undo(self) -> None:
        rec = self.history.pop()
        if rec is None:
            return
        ra, rb = rec
        self.parent[rb] = rb
        self.size[ra] -= self.size[rb]
        self.components += 1


def cluster_counts(graph, bc: BoundaryCondition | None = None) -> np.ndarray:
    """k(omega^xi) for every mask, in mask order."""
    g = as_graph(graph)
    m = g.n_edges
    if m > MAX_EDGES:
        raise ValueError(f"{m} edges exceed the enumeration cap of {MAX_EDGES}")
    uf = _RollbackUnionFind(g.n_vertices)
    if bc is not None:
        for cls_ in bc.wired_classes():
            for v in cls_[1:]:
                uf.union(cls_[0], v)
        uf.history.clear()
    out = np.empty(1 << m, dtype=np.int32)
    eu, ev = g.edge_u, g.edge_v

    # depth-first over edges from the highest bit down, so the leaf order is the mask order
    def rec(e: int, mask: int) -> None:
        if e < 0:
            out[mask] = uf.components
            return
        rec(e - 1, mask)
        uf.union(eu[e], ev[e])
        rec(e - 1, mask | (1 << e))
        uf.undo()

    rec(m - 1, 0)
    return out


def mask_to_state(mask: int, n_edges: int) -> np.ndarray:
    return ((mask >> np.arange(n_edges)) & 1).astype(np.uint8)


def state_to_mask(state) -> int:
    s = np.asarray(state, dtype=np.int64)
    return int((s << np.arange(len(s), dtype=np.int64)).sum())


def all_states(n_edges: int) -> np.ndarray:
    masks = np.arange(1 << n_edges, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n_edges)) & 1).astype(np.uint8)


def _log_weights(graph, p: np.ndarray, q: float, bc) -> np.ndarray:
    g = as_graph(graph)
    p = np.asarray(p, dtype=float)
    if len(p) != g.n_edges:
        raise ValueError("one probability per edge is required")
    k = cluster_counts(g, bc)
    states = all_states(g.n_edges)
    lw = states @ np.log(p) + (1 - states) @ np.log1p(-p) + k * math.log(q)
    return lw


def partition_function(graph, weights, q: float, bc: BoundaryCondition | None = None) -> float:
    """Z = sum over configurations of q^{k(omega^xi)} prod p^omega (1-p)^(1-omega)."""
    p = getattr(weights, "per_edge", weights)
    lw = _log_weights(graph, p, q, bc)
    if len(p) > LOG_DOMAIN_EDGES:
        mx = lw.max()
        return float(math.exp(mx) * np.exp(lw - mx).sum())
    return float(np.exp(lw).sum())


def log_partition_function(graph, weights, q: float, bc: BoundaryCondition | None = None) -> float:
    p = getattr(weights, "per_edge", weights)
    lw = _log_weights(graph, p, q, bc)
    mx = lw.max()
    return float(mx + math.log(np.exp(lw - mx).sum()))


class ExactMeasure:
    """Random-cluster measure stored as a probability vector over masks."""

    def __init__(self, graph, weights, q: float, bc: BoundaryCondition | None = None):
        self.graph = as_graph(graph)
        self.p = np.asarray(getattr(weights, "per_edge", weights), dtype=float)
        self.q = float(q)
        self.bc = bc if bc is not None else BoundaryCondition.free()
        lw = _log_weights(self.graph, self.p, self.q, self.bc)
        mx = lw.max()
        w = np.exp(lw - mx)
        total = w.sum()
        self.log_partition_function = float(mx + math.log(total))
        self.probabilities = w / total
        self.probabilities.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @property
    def partition_function(self) -> float:
        return math.exp(self.log_partition_function)

    def probability_of(self, state) -> float:
        return float(self.probabilities[state_to_mask(state)])

    def probability(self, event: Callable[[np.ndarray], bool]) -> float:
        return exact_probability(self, event)

    def states(self) -> np.ndarray:
        return all_states(self.n_edges)


def exact_probability(measure: ExactMeasure, event: Callable[[np.ndarray], bool]) -> float:
    states = measure.states()
    hit = np.fromiter((bool(event(s)) for s in states), dtype=bool, count=len(states))
    return float(measure.probabilities[hit].sum())


def exact_pushforward(measure, kernel, n_target_edges: int | None = None,
                      tol: float = 1e-12) -> np.ndarray:
    """Exact output law of a randomised map.

    ``kernel(state)`` returns an iterable of ``(probability, new_state)`` pairs.
    ``measure`` is an :class:`ExactMeasure` or a probability vector over masks.
    """
    probs = getattr(measure, "probabilities", measure)
    probs = np.asarray(probs, dtype=float)
    m = int(round(math.log2(len(probs))))
    mt = m if n_target_edges is None else n_target_edges
    out = np.zeros(1 << mt)
    for mask in range(len(probs)):
        w = probs[mask]
        if w == 0.0:
            continue
        state = mask_to_state(mask, m)
        total = 0.0
        for pr, new in kernel(state):
            total += pr
            out[state_to_mask(new)] += w * pr
        if abs(total - 1.0) > tol:
            raise ValueError(f"kernel weights sum to {total} for mask {mask}")
    return out


def total_variation(a, b) -> float:
    return 0.5 * float(np.abs(np.asarray(a) - np.asarray(b)).sum())


def dominates(upper, lower, n_edges: int) -> bool:
    """True when ``upper`` stochastically dominates ``lower`` for the coordinatewise order.

    Checked by solving for a monotone coupling (Strassen) as a linear program.
    """
    masks = np.arange(1 << n_edges)
    pairs = [(a, b) for a in masks for b in masks if (a & b) == a]
    nvar = len(pairs)
    n = len(masks)
    rows, cols, vals = [], [], []
    for k, (a, b) in enumerate(pairs):
        rows += [a, n + b]
        cols += [k, k]
        vals += [1.0, 1.0]
    A = csr_matrix((vals, (rows, cols)), shape=(2 * n, nvar))
    rhs = np.concatenate([np.asarray(lower, float), np.asarray(upper, float)])
    res = linprog(np.zeros(nvar), A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    return res.status == 0


def single_edge_update(state, edge: int, graph, p: np.ndarray, q: float, bc=None):
    """Exact heat-bath kernel of one edge: list of (probability, new_state)."""
    g = as_graph(graph)
    conn = connected_off(g, state, edge, bc)
    pe = p[edge]
    po = pe if conn else pe / (pe + q * (1.0 - pe))
    s1 = np.array(state, dtype=np.uint8)
    s1[edge] = 1
    s0 = np.array(state, dtype=np.uint8)
    s0[edge] = 0
    return [(po, s1), (1.0 - po, s0)]


def connected_off(graph, state, edge: int, bc=None) -> bool:
    """Are the endpoints of ``edge`` joined by open edges other than ``edge`` (and wirings)?"""
    g = as_graph(graph)
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if bc is not None:
        for cls_ in bc.wired_classes():
            for v in cls_[1:]:
                parent[find(v)] = find(cls_[0])
    for e in range(g.n_edges):
        if e != edge and state[e]:
            parent[find(g.edge_u[e])] = find(g.edge_v[e])
    return find(g.edge_u[edge]) == find(g.edge_v[edge])


def sweep_kernel(graph, p, q: float, bc=None, order=None):
    """Exact kernel of one full heat-bath sweep (edges updated in ``order``)."""
    g = as_graph(graph)
    p = np.asarray(getattr(p, "per_edge", p), dtype=float)
    order = list(range(g.n_edges)) if order is None else list(order)

    def kernel(state):
        dist = {state_to_mask(state): 1.0}
        for e in order:
            nxt: dict[int, float] = {}
            for mask, w in dist.items():
                s = mask_to_state(mask, g.n_edges)
                for pr, new in single_edge_update(s, e, g, p, q, bc):
                    if pr > 0.0:
                        key = state_to_mask(new)
                        nxt[key] = nxt.get(key, 0.0) + w * pr
            dist = nxt
        return [(w, mask_to_state(mask, g.n_edges)) for mask, w in dist.items()]

    return kernel


def dump_fixture(probabilities, path=None) -> str:
    """CSV of (mask, probability); written to ``path`` when given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mask", "probability"])
    for mask, pr in enumerate(np.asarray(probabilities, dtype=float)):
        w.writerow([mask, repr(float(pr))])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_fixture(path_or_text: str) -> np.ndarray:
    text = path_or_text
    if "\n" not in path_or_text:
        with open(path_or_text) as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["mask", "probability"]:
        raise ValueError("fixture header must be 'mask,probability'")
    out = np.zeros(len(rows) - 1)
    for mask, pr in rows[1:]:
        out[int(mask)] = float(pr)
    return out
