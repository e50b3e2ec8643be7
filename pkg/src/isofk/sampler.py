"""Single-edge heat-bath sampling of random-cluster measures.

Each edge is resampled from its conditional law given the rest: open with
probability ``p_e`` when its endpoints are already joined off ``e`` (through
open edges and boundary wirings), with ``p_e / (p_e + q (1 - p_e))`` otherwise.
Connectivity is decided exactly for every update by a bidirectional search,
so the chain leaves the measure invariant at every step, not only per sweep.

Boundary wirings are realised by one hub vertex per wired class joined to its
members by edges that are always open.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .exact import BoundaryCondition, Graph
from .lattice import RectLattice, STRIP, AngleSequence, build_lattice, csr_adjacency
from .weights import WeightTable


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for replica ``stream`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _graph_parts(graph) -> tuple[int, np.ndarray, np.ndarray]:
    if isinstance(graph, Graph):
        return (graph.n_vertices, np.asarray(graph.edge_u, dtype=np.int64),
                np.asarray(graph.edge_v, dtype=np.int64))
    topo = getattr(graph, "topo", graph)
    return topo.n_vertices, np.asarray(topo.edge_u, np.int64), np.asarray(topo.edge_v, np.int64)


class WiredGraph:
    """Graph plus hub vertices/edges implementing a boundary condition."""

    def __init__(self, graph, bc: BoundaryCondition | None):
        n, eu, ev = _graph_parts(graph)
        self.n_real_vertices = n
        self.n_real_edges = len(eu)
        hubs_u, hubs_v = [], []
        classes = bc.wired_classes() if bc is not None else []
        for h, cls_ in enumerate(classes):
            for v in cls_:
                hubs_u.append(n + h)
                hubs_v.append(v)
        self.n_vertices = n + len(classes)
        self.eu = np.concatenate([eu, np.asarray(hubs_u, np.int64)])
        self.ev = np.concatenate([ev, np.asarray(hubs_v, np.int64)])
        self.indptr, self.nbr, self.eid = csr_adjacency(self.n_vertices, self.eu, self.ev)
        self.order = np.arange(self.n_real_edges, dtype=np.int64)

    def full_state(self, state: np.ndarray) -> np.ndarray:
        out = np.ones(len(self.eu), dtype=np.uint8)
        out[: self.n_real_edges] = state
        return out


_WIRED_CACHE: dict[tuple, WiredGraph] = {}


def wired_graph(graph, bc: BoundaryCondition | None) -> WiredGraph:
    topo = getattr(graph, "topo", graph)
    key = (id(topo), bc)
    wg = _WIRED_CACHE.get(key)
    if wg is None or wg.n_real_edges != _graph_parts(graph)[1].shape[0]:
        wg = WiredGraph(graph, bc)
        if len(_WIRED_CACHE) > 64:
            _WIRED_CACHE.clear()
        _WIRED_CACHE[key] = wg
        # keep the topology alive while it is a cache key
        wg._owner = topo
    return wg


class Configuration:
    """Open/closed state per edge with lazily rebuilt cluster labels."""

    def __init__(self, lattice, state=None, bc: BoundaryCondition | None = None,
                 q: float | None = None):
        self.lattice = lattice
        self.bc = bc
        self.q = q
        self.inexact_moves = 0
        self.diagnostics: dict = {}
        self.wired = wired_graph(lattice, bc)
        if state is None:
            state = np.zeros(self.wired.n_real_edges, dtype=np.uint8)
        self._full = self.wired.full_state(np.asarray(state, dtype=np.uint8))
        self.generation = 0
        self._labels = None
        self._label_gen = -1

    @property
    def state(self) -> np.ndarray:
        """View of the real-edge states (writes must be followed by :meth:`touch`)."""
        return self._full[: self.wired.n_real_edges]

    @property
    def full_state(self) -> np.ndarray:
        return self._full

    def touch(self) -> None:
        self.generation += 1

    def copy(self) -> "Configuration":
        c = Configuration(self.lattice, self.state.copy(), self.bc, self.q)
        c.inexact_moves = self.inexact_moves
        return c

    def with_lattice(self, lattice) -> "Configuration":
        """Same states on a lattice with identical combinatorics (e.g. swapped angles)."""
        c = Configuration.__new__(Configuration)
        c.lattice = lattice
        c.bc = self.bc
        c.q = self.q
        c.inexact_moves = self.inexact_moves
        c.diagnostics = self.diagnostics
        c.wired = self.wired
        c._full = self._full
        c.generation = self.generation
        c._labels = self._labels
        c._label_gen = self._label_gen
        return c

    def labels(self) -> np.ndarray:
        """Cluster label of every real vertex (wirings included)."""
        if self._labels is None or self._label_gen != self.generation:
            lab = core.label_clusters(self.wired.n_vertices, self.wired.eu, self.wired.ev, self._full)
            self._labels = lab[: self.wired.n_real_vertices]
            self._label_gen = self.generation
        return self._labels

    def connected(self, u: int, v: int, skip_edge: int = -1) -> bool:
        w = self.wired
        return bool(core.connected(w.indptr, w.nbr, w.eid, self._full, int(u), int(v),
                                   int(skip_edge)))

    def density(self) -> float:
        return float(self.state.mean())


@dataclass
class ChainState:
    """A reproducible Markov chain: (seed, stream, sweeps) determines the state."""

    config: Configuration
    weights: WeightTable
    rng: np.random.Generator
    seed: int = 0
    stream: int = 0
    sweeps: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def q(self) -> float:
        return self.weights.q


def heat_bath_sweep(state: ChainState, backend=None) -> ChainState:
    """One pass over all edges in id order, each resampled from its conditional law."""
    cfg = state.config
    w = cfg.wired
    u = state.rng.random(w.n_real_edges)
    impl = backend if backend is not None else core
    impl.heat_bath_sweep(w.indptr, w.nbr, w.eid, w.eu, w.ev, cfg.full_state,
                         np.ascontiguousarray(state.weights.per_edge, dtype=float),
                         float(state.weights.q), u, w.order)
    cfg.touch()
    state.sweeps += 1
    return state


def integrated_autocorrelation(x, c: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's self-consistent window."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4:
        return 1.0
    x = x - x.mean()
    var = x.var()
    if var == 0.0:
        return 1.0
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n] / (var * n)
    tau = 1.0
    for m in range(1, n):
        tau = 1.0 + 2.0 * acf[1:m + 1].sum()
        if m >= c * tau:
            break
    return max(float(tau), 1.0)


def new_chain(lattice, weights: WeightTable, bc: BoundaryCondition | None = None,
              seed: int = 0, stream: int = 0, init: str = "closed") -> ChainState:
    n_edges = _graph_parts(lattice)[1].shape[0]
    rng = make_rng(seed, stream)
    if init == "closed":
        st = np.zeros(n_edges, dtype=np.uint8)
    elif init == "open":
        st = np.ones(n_edges, dtype=np.uint8)
    elif init == "random":
        st = (rng.random(n_edges) < weights.per_edge).astype(np.uint8)
    else:
        raise ValueError(f"unknown initial state {init!r}")
    return ChainState(Configuration(lattice, st, bc, weights.q), weights, rng, seed, stream)


def run_chain(chain: ChainState, sweeps: int | None = None, min_sweeps: int = 50,
              max_sweeps: int = 20000, tau_factor: float = 10.0) -> ChainState:
    """Advance ``chain``; with ``sweeps=None`` stop after ``tau_factor`` autocorrelation times."""
    dens = []
    if sweeps is not None:
        for _ in range(sweeps):
            heat_bath_sweep(chain)
            dens.append(chain.config.density())
        tau = integrated_autocorrelation(dens)
    else:
        tau = 1.0
        while True:
            heat_bath_sweep(chain)
            dens.append(chain.config.density())
            n = len(dens)
            if n >= min_sweeps and (n & (n - 1)) == 0 or n >= max_sweeps:
                tau = integrated_autocorrelation(dens[n // 2:])
                if n >= tau_factor * tau and n >= min_sweeps or n >= max_sweeps:
                    break
    chain.diagnostics = {
        "sweeps": chain.sweeps,
        "tau_density": tau,
        "density": float(np.mean(dens[len(dens) // 2:])) if dens else chain.config.density(),
        "converged": len(dens) >= tau_factor * tau,
    }
    return chain


def sample(lattice, weights: WeightTable, q: float | None = None,
           bc: BoundaryCondition | None = None, sweeps: int | None = None, seed: int = 0,
           stream: int = 0, init: str = "closed") -> Configuration:
    """Approximate sample of the random-cluster measure; diagnostics on ``.diagnostics``."""
    if q is not None and abs(q - weights.q) > 1e-15:
        raise ValueError("q disagrees with the weight table")
    chain = run_chain(new_chain(lattice, weights, bc, seed, stream, init), sweeps)
    cfg = chain.config
    cfg.diagnostics = chain.diagnostics
    return cfg


def half_plane_lattice(angles: AngleSequence, K: int, width: int, col_min: int | None = None
                       ) -> RectLattice:
    return build_lattice(angles, width, K, STRIP, col_min=col_min)


def half_plane_bc(lattice: RectLattice, elsewhere: str = "free") -> BoundaryCondition:
    """Free on the bottom row; ``elsewhere`` is 'free' or 'wired' for the other sides."""
    topo = lattice.topo
    bottom = topo.side_vertices("bottom")
    if elsewhere == "free":
        return BoundaryCondition.free(topo.boundary_vertices)
    if elsewhere == "wired":
        return BoundaryCondition.mixed(bottom, topo.boundary_vertices)
    raise ValueError(f"unknown boundary condition {elsewhere!r}")


def sample_half_plane(angles: AngleSequence, K: int, width: int, q: float, seed: int = 0,
                      stream: int = 0, sweeps: int | None = None, elsewhere: str = "free"
                      ) -> Configuration:
    """Strip of ``K`` tracks above the axis with free bottom boundary."""
    lat = half_plane_lattice(angles, K, width)
    bc = half_plane_bc(lat, elsewhere)
    return sample(lat, WeightTable.for_lattice(lat, q), bc=bc, sweeps=sweeps, seed=seed,
                  stream=stream)


BOTTOM_EVENTS = ("t1_edge", "t4_edge", "vertical_crossing", "row2_link", "t2_majority")


def bottom_track_events(config: Configuration, columns, n_tracks: int = 4) -> np.ndarray:
    """Indicators of five events measurable on tracks ``t_1..t_n`` of a strip, per column.

    For a base column ``c``: the rhombus ``(t_1, s_c)`` is open; the rhombus
    ``(t_n, s_c)`` is open; the primal point of row 0 at ``c`` or ``c + 1`` is
    joined to row ``n`` inside columns ``c - 4 .. c + 4``; the primal points of
    row 2 near ``c`` and ``c + 4`` are joined; at least half of ``t_2`` is open
    over ``s_{c+1} .. s_{c+8}``.  Only edges of the bottom ``n`` tracks are used.
    """
    lat = config.lattice
    topo = lat.topo
    if lat.row_min != 0 or topo.n_tracks < n_tracks:
        raise ValueError("events need a strip with at least n_tracks tracks")
    m = n_tracks * topo.n_columns
    state = np.asarray(config.state[:m], dtype=np.uint8)
    eu = np.asarray(topo.edge_u[:m], np.int64)
    ev = np.asarray(topo.edge_v[:m], np.int64)
    nv = int(np.searchsorted(topo.vertex_rc[:, 0], n_tracks + 1))
    labels = core.label_clusters(nv, eu, ev, state)
    par = topo.parity

    def primal_col(r, c):
        return c if (r + c) % 2 == par else c + 1

    out = []
    for c in columns:
        c = int(c)
        row = [state[topo.edge_id(1, c)], state[topo.edge_id(n_tracks, c)]]
        cols_e = topo.edge_column[:m]
        keep = ((cols_e > c - 4) & (cols_e <= c + 4)).astype(np.uint8)
        lab_box = core.label_clusters(nv, eu, ev, state & keep)
        start = topo.vertex_id(0, primal_col(0, c))
        top = [topo.vertex_id(n_tracks, x) for x in range(c - 4, c + 5)
               if topo.has_vertex(n_tracks, x)]
        row.append(bool(np.isin(lab_box[start], lab_box[top])))
        a = topo.vertex_id(2, primal_col(2, c))
        b = topo.vertex_id(2, primal_col(2, c + 4))
        row.append(labels[a] == labels[b])
        t2 = [state[topo.edge_id(2, j)] for j in range(c + 1, c + 9)]
        row.append(2 * sum(t2) >= len(t2))
        out.append(row)
    return np.asarray(out, dtype=float)


def bottom_event_probabilities(angles: AngleSequence, K: int, width: int, q: float,
                               replicas: int = 8, measurements: int = 200, spacing: int = 2,
                               burn_in: int | None = None, seed: int = 0, n_tracks: int = 4
                               ) -> tuple[np.ndarray, np.ndarray]:
    """Means and standard errors of :func:`bottom_track_events` in the free half-plane strip.

    Each replica is an independent chain; the error is the spread of the
    replica means, which absorbs the autocorrelation of each chain.
    """
    lat = half_plane_lattice(angles, K, width)
    bc = half_plane_bc(lat)
    weights = WeightTable.for_lattice(lat, q)
    columns = np.arange(lat.col_min + 6, lat.col_max - 9, 4)
    means = []
    for k in range(replicas):
        chain = run_chain(new_chain(lat, weights, bc, seed=seed, stream=k), burn_in)
        acc = np.zeros(len(BOTTOM_EVENTS))
        for _ in range(measurements):
            for _ in range(spacing):
                heat_bath_sweep(chain)
            acc += bottom_track_events(chain.config, columns, n_tracks).mean(axis=0)
        means.append(acc / measurements)
    means = np.asarray(means)
    se = means.std(axis=0, ddof=1) / math.sqrt(replicas) if replicas > 1 else np.full(5, np.inf)
    return means.mean(axis=0), se


def exact_cluster_count(cfg: Configuration) -> int:
    return int(cfg.labels().max()) + 1 if cfg.wired.n_real_vertices else 0


def free_edge_probability(p: float, q: float) -> float:
    """Open probability of an edge whose endpoints are otherwise disconnected."""
    return p / (p + q * (1.0 - p))


__all__ = [
    "ChainState", "Configuration", "WiredGraph", "heat_bath_sweep", "integrated_autocorrelation",
    "make_rng", "new_chain", "BOTTOM_EVENTS", "bottom_track_events", "bottom_event_probabilities", "run_chain", "sample", "sample_half_plane", "half_plane_bc",
    "half_plane_lattice", "free_edge_probability",
]
