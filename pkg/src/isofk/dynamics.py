"""Star-triangle moves and track exchanges.

Exchanging horizontal tracks ``t_{i-1}`` (angle ``a``) and ``t_i`` (angle
``b``) moves only the diamond row ``m = i - 1`` between them.  The exchange is
carried out by pushing one crossing of the two tracks (the *kink*) through
the columns.  With the kink in column ``k``, rhombus columns on the start side
of ``k`` are already exchanged and the others are not; the kink rhombus itself
carries one extra primal edge.  Each step across a column is a star-triangle
move on the hexagon made of the kink rhombus and the two rhombi of the next
column, and is realised by a local kernel that preserves the random-cluster
law for every wiring of the three outer vertices.

When ``a < b`` the kink travels left to right; when ``a > b`` the picture is
mirrored, the kink travels right to left and the kernels are those of the
angles ``(pi - a, pi - b)``.

At the lateral ends the kink edge is created and destroyed.  If the middle
vertex of the end column is primal the kink edge is a pendant edge and both
operations are exact.  Otherwise it is a chord between the end vertices of
rows ``m - 1`` and ``m + 1``; unless those are wired together the chord is
drawn from its conditional law given the configuration, which is only
approximately correct.  Moves that used such a chord are counted on the
configuration (``inexact_moves``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from ._backend import core
from .exact import BoundaryCondition
from .lattice import RectLattice
from .weights import isoradial_weight

# partitions of the three outer vertices by outside connections
WIRING_CLASSES: tuple[tuple[tuple[int, ...], ...], ...] = (
    ((0,), (1,), (2,)),
    ((0, 1), (2,)),
    ((0, 2), (1,)),
    ((1, 2), (0,)),
    ((0, 1, 2),),
)

# table ids used by the compiled propagation loop
STAR_TO_TRIANGLE, TRIANGLE_TO_STAR, WIRED_AFTER_STAR, WIRED_AFTER_TRIANGLE = 0, 1, 2, 3

KERNEL_TOL = 1e-12


class KernelError(RuntimeError):
    """A kernel failed to exist or failed verification."""


# -- local graphs ---------------------------------------------------------------
@dataclass(frozen=True)
class LocalGraph:
    """Three edges in bit order (kink, lower, upper) on outer vertices 0, 1, 2
    and, for a star, centre vertex 3.  Local state ``s`` has kink ``s >> 2``,
    lower ``(s >> 1) & 1`` and upper ``s & 1``."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    thetas: tuple[float, float, float]

    def probabilities(self, q: float) -> np.ndarray:
        return np.array([isoradial_weight(t, q) for t in self.thetas])

    def _components(self, s: int, wiring=((0,), (1,), (2,))) -> list[int]:
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for cls_ in wiring:
            for v in cls_[1:]:
                parent[find(v)] = find(cls_[0])
        for bit, (u, v) in enumerate(self.edges):
            if s >> (2 - bit) & 1:
                parent[find(u)] = find(v)
        return [find(x) for x in range(self.n_vertices)]

    def pattern(self, s: int) -> tuple[int, int, int]:
        """Partition of the outer vertices induced by the open local edges."""
        roots = self._components(s)[:3]
        seen: dict[int, int] = {}
        return tuple(seen.setdefault(r, len(seen)) for r in roots)

    def measure(self, q: float, wiring) -> np.ndarray:
        """Local random-cluster law given the outside wiring of the outer vertices."""
        p = self.probabilities(q)
        w = np.empty(8)
        for s in range(8):
            bits = [(s >> (2 - b)) & 1 for b in range(3)]
            k = len(set(self._components(s, wiring)))
            w[s] = np.prod([p[b] if bits[b] else 1.0 - p[b] for b in range(3)]) * q ** k
        return w / w.sum()


def star_before(a: float, b: float) -> LocalGraph:
    return LocalGraph(4, ((3, 0), (3, 1), (3, 2)), (b - a, a, math.pi - b))


def triangle_after(a: float, b: float) -> LocalGraph:
    return LocalGraph(3, ((1, 2), (0, 1), (0, 2)), (math.pi - (b - a), b, math.pi - a))


def triangle_before(a: float, b: float) -> LocalGraph:
    return LocalGraph(3, ((0, 2), (0, 1), (1, 2)), (math.pi - (b - a), math.pi - a, b))


def star_after(a: float, b: float) -> LocalGraph:
    return LocalGraph(4, ((3, 1), (3, 0), (3, 2)), (b - a, math.pi - b, a))


def _product_rows(graph: LocalGraph, q: float) -> np.ndarray:
    p = graph.probabilities(q)
    row = np.array([np.prod([p[b] if (s >> (2 - b)) & 1 else 1 - p[b] for b in range(3)])
                    for s in range(8)])
    return np.tile(row, (8, 1))


# -- kernel solving -------------------------------------------------------------
def _constraints(src: LocalGraph, dst: LocalGraph, q: float):
    rows, rhs = [], []
    for i in range(8):
        r = np.zeros(64)
        r[i * 8:(i + 1) * 8] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for wiring in WIRING_CLASSES:
        mu_in = src.measure(q, wiring)
        mu_out = dst.measure(q, wiring)
        for j in range(8):
            r = np.zeros(64)
            r[j::8] = mu_in
            rows.append(r)
            rhs.append(mu_out[j])
    return np.array(rows), np.array(rhs)


def _allowed(src: LocalGraph, dst: LocalGraph) -> np.ndarray:
    return np.array([[src.pattern(i) == dst.pattern(j) for j in range(8)] for i in range(8)])


def solve_transport(src: LocalGraph, dst: LocalGraph, q: float) -> np.ndarray:
    """Stochastic 8x8 matrix mapping the local law on ``src`` to the one on ``dst``
    for every outside wiring, never changing the outer connectivity pattern."""
    A, rhs = _constraints(src, dst, q)
    allowed = _allowed(src, dst).ravel()
    hamming = np.array([bin(i ^ j).count("1") for i in range(8) for j in range(8)], float)
    bounds = [(0.0, 1.0 if ok else 0.0) for ok in allowed]
    res = linprog(hamming, A_eq=A, b_eq=rhs, bounds=bounds, method="highs")
    if res.status != 0:
        raise KernelError(f"no nonnegative kernel for {src.thetas} -> {dst.thetas}: {res.message}")
    x = np.clip(res.x, 0.0, None)
    # polish on the support so the constraints hold to rounding error
    support = (x > 1e-12) & allowed
    sol, *_ = np.linalg.lstsq(A[:, support], rhs, rcond=None)
    x = np.zeros(64)
    x[support] = np.clip(sol, 0.0, None)
    K = x.reshape(8, 8)
    K /= K.sum(axis=1, keepdims=True)
    return K


def transport_residual(K: np.ndarray, src: LocalGraph, dst: LocalGraph, q: float) -> float:
    """Largest violation of row sums, measure preservation or pattern preservation."""
    K = np.asarray(K, float)
    worst = float(np.abs(K.sum(axis=1) - 1.0).max())
    worst = max(worst, float(-K.min()) if K.min() < 0 else 0.0)
    worst = max(worst, float(np.abs(K[~_allowed(src, dst)]).max(initial=0.0)))
    for wiring in WIRING_CLASSES:
        out = src.measure(q, wiring) @ K
        worst = max(worst, 0.5 * float(np.abs(out - dst.measure(q, wiring)).sum()))
    return worst


@dataclass(frozen=True)
class StarTriangleKernel:
    """Local kernels for exchanging tracks of angles ``below`` and ``above``.

    ``frame`` holds the ordered angles (``a < b``) in which the kink
    propagates; it is ``(below, above)`` or, mirrored, ``(pi - below, pi - above)``.
    """

    below: float
    above: float
    q: float
    star_to_triangle: np.ndarray
    triangle_to_star: np.ndarray

    @property
    def identity(self) -> bool:
        return self.below == self.above

    @property
    def mirrored(self) -> bool:
        return self.below > self.above

    @property
    def frame(self) -> tuple[float, float]:
        if self.mirrored:
            return math.pi - self.below, math.pi - self.above
        return self.below, self.above

    @property
    def kink_angle(self) -> float:
        """Rhombus angle of the kink edge when it joins two middle-row vertices."""
        a, b = self.frame
        return b - a

    def graphs(self):
        a, b = self.frame
        return ((star_before(a, b), triangle_after(a, b)),
                (triangle_before(a, b), star_after(a, b)))

    def residual(self) -> float:
        if self.identity:
            return 0.0
        (s0, t0), (t1, s1) = self.graphs()
        return max(transport_residual(self.star_to_triangle, s0, t0, self.q),
                   transport_residual(self.triangle_to_star, t1, s1, self.q))

    def verify(self, tol: float = 1e-9) -> None:
        r = self.residual()
        if not r < tol:
            raise KernelError(f"kernel for ({self.below}, {self.above}, q={self.q}) "
                              f"violates its constraints by {r:.3e}")

    def tables(self) -> np.ndarray:
        """Transition rows indexed by table id (see the module constants)."""
        if self.identity:
            eye = np.eye(8)
            return np.stack([eye, eye, eye, eye])
        (_, t0), (_, s1) = self.graphs()
        return np.stack([self.star_to_triangle, self.triangle_to_star,
                         _product_rows(t0, self.q), _product_rows(s1, self.q)])

    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.tables(), axis=2)
        c[:, :, -1] = 1.0
        return np.ascontiguousarray(c)

    # -- plain-text persistence ---------------------------------------------
    def to_text(self) -> str:
        lines = ["# star-triangle kernel; rows are input states kink*4+lower*2+upper",
                 f"q={self.q!r}", f"below={self.below!r}", f"above={self.above!r}"]
        for name in ("star_to_triangle", "triangle_to_star"):
            lines.append(name)
            for row in getattr(self, name):
                lines.append(" ".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, verify: bool = True) -> "StarTriangleKernel":
        fields: dict[str, str] = {}
        mats: dict[str, list[list[float]]] = {}
        current = None
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                k, _, v = line.partition("=")
                fields[k] = v
            elif line in ("star_to_triangle", "triangle_to_star"):
                current = mats.setdefault(line, [])
            elif current is not None:
                current.append([float(x) for x in line.split()])
            else:
                raise KernelError(f"unexpected line in kernel file: {line!r}")
        try:
            k = cls(float(fields["below"]), float(fields["above"]), float(fields["q"]),
                    np.array(mats["star_to_triangle"], float),
                    np.array(mats["triangle_to_star"], float))
        except (KeyError, ValueError) as exc:
            raise KernelError(f"malformed kernel file: {exc}") from exc
        if k.star_to_triangle.shape != (8, 8) or k.triangle_to_star.shape != (8, 8):
            raise KernelError("kernel matrices must be 8x8")
        if verify:
            k.verify()
        return k


@lru_cache(maxsize=256)
def _solve_cached(below: float, above: float, q: float) -> StarTriangleKernel:
    if below == above:
        eye = np.eye(8)
        return StarTriangleKernel(below, above, q, eye, eye)
    a, b = (math.pi - below, math.pi - above) if below > above else (below, above)
    s2t = solve_transport(star_before(a, b), triangle_after(a, b), q)
    t2s = solve_transport(triangle_before(a, b), star_after(a, b), q)
    k = StarTriangleKernel(below, above, q, s2t, t2s)
    k.verify()
    return k


def solve_kernel(angle_pair: tuple[float, float], q: float) -> StarTriangleKernel:
    """Kernel exchanging a track of angle ``angle_pair[0]`` with the one above it."""
    below, above = (float(x) for x in angle_pair)
    for x in (below, above):
        if not 0.0 < x < math.pi:
            raise ValueError(f"angle {x} outside (0, pi)")
    if q <= 0:
        raise ValueError("q must be positive")
    cache_dir = os.environ.get("ISOFK_KERNEL_CACHE")
    if cache_dir:
        return KernelCache(cache_dir).get(below, above, float(q))
    return _solve_cached(below, above, float(q))


class KernelCache:
    """Directory of plain-text kernels, re-verified whenever they are read."""

    def __init__(self, directory: str):
        self.directory = directory

    def path(self, below: float, above: float, q: float) -> str:
        name = f"kernel_{below.hex()}_{above.hex()}_{q.hex()}.txt".replace("+", "")
        return os.path.join(self.directory, name)

    def get(self, below: float, above: float, q: float) -> StarTriangleKernel:
        path = self.path(below, above, q)
        if os.path.exists(path):
            with open(path) as fh:
                k = StarTriangleKernel.from_text(fh.read())
            if (k.below, k.above, k.q) != (below, above, q):
                raise KernelError(f"kernel file {path} holds different parameters")
            return k
        k = _solve_cached(below, above, q)
        os.makedirs(self.directory, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(k.to_text())
        return k


# -- exchange plans -------------------------------------------------------------
@dataclass(frozen=True)
class ExchangePlan:
    """Column-by-column recipe of one track exchange on a given patch and bc."""

    i: int
    lower: np.ndarray          # edge ids of the lower slot per step
    upper: np.ndarray          # edge ids of the upper slot per step
    tables: np.ndarray         # table id per step
    start_pendant: bool        # kink edge created as a pendant edge
    start_ends: tuple[int, int]  # (B, T) at the start column, chord end points
    start_wired: bool          # kink edge created inside one wired class
    end_exact: bool            # removing the kink edge is exact

    @property
    def exact(self) -> bool:
        return (self.start_pendant or self.start_wired) and self.end_exact


def _vid(topo, r, c):
    return topo.vertex_id(r, c) if topo.has_vertex(r, c) else -1


def make_plan(lattice: RectLattice, i: int, bc: BoundaryCondition | None = None) -> ExchangePlan:
    topo = lattice.topo
    if i - 1 not in lattice.tracks or i not in lattice.tracks:
        raise IndexError(f"tracks t_{i - 1}, t_{i} are not both in the patch")
    return _make_plan(topo, i, lattice.track_angle(i - 1) > lattice.track_angle(i), bc)


@lru_cache(maxsize=4096)
def _make_plan(topo, i: int, mirrored: bool, bc) -> ExchangePlan:
    m = i - 1
    c0, c1 = topo.col_min, topo.col_max
    cls_of = bc.class_of() if bc is not None else {}

    def same_class(*vs):
        ids = {cls_of.get(v, ("free", v)) for v in vs}
        return len(ids) == 1 and not isinstance(next(iter(ids)), tuple)

    cols = list(range(c0, c1 + 1))
    if mirrored:
        cols.reverse()
    lower, upper, tables = [], [], []
    for k, nxt in zip(cols[:-1], cols[1:]):
        slot = max(k, nxt)
        lower.append(topo.edge_id(i - 1, slot))
        upper.append(topo.edge_id(i, slot))
        if topo.has_vertex(m, k):
            centre = topo.vertex_id(m, k)
            outer = (centre, topo.vertex_id(m - 1, nxt), topo.vertex_id(m + 1, nxt))
            table, wired_table = STAR_TO_TRIANGLE, WIRED_AFTER_STAR
        else:
            centre = topo.vertex_id(m, nxt)
            outer = (topo.vertex_id(m - 1, k), centre, topo.vertex_id(m + 1, k))
            table, wired_table = TRIANGLE_TO_STAR, WIRED_AFTER_TRIANGLE
        if centre in cls_of:
            if not same_class(*outer):
                raise ValueError(f"exchange t_{i - 1}/t_{i} is undefined when the middle vertex "
                                 "of a column is wired apart from its neighbours")
            table = wired_table
        tables.append(table)
    start, end = cols[0], cols[-1]
    start_pendant = topo.has_vertex(m, start)
    if start_pendant:
        ends = (topo.vertex_id(m, start), topo.vertex_id(m, start))
        start_wired = ends[0] in cls_of
    else:
        ends = (topo.vertex_id(m - 1, start), topo.vertex_id(m + 1, start))
        start_wired = same_class(*ends)
    end_exact = topo.has_vertex(m, end) or same_class(topo.vertex_id(m - 1, end),
                                                        topo.vertex_id(m + 1, end))
    arr = lambda x, t: np.ascontiguousarray(np.asarray(x, dtype=t))  # noqa: E731
    return ExchangePlan(i, arr(lower, np.int64), arr(upper, np.int64), arr(tables, np.uint8),
                        start_pendant, ends, start_wired, end_exact)


def exchange_is_exact(lattice: RectLattice, i: int, bc: BoundaryCondition | None = None) -> bool:
    """Whether :func:`track_exchange` maps the exact measure to the exact measure."""
    if lattice.track_angle(i - 1) == lattice.track_angle(i):
        return True
    return make_plan(lattice, i, bc).exact


def _start_probability(plan: ExchangePlan, kernel: StarTriangleKernel, q: float,
                       joined) -> float:
    """Probability that the freshly created kink edge is open."""
    if plan.start_pendant:
        p = isoradial_weight(kernel.kink_angle, q)
        return p if plan.start_wired else p / (p + q * (1.0 - p))
    p = isoradial_weight(math.pi - kernel.kink_angle, q)
    if plan.start_wired or joined():
        return p
    return p / (p + q * (1.0 - p))


# -- the exchange operator ------------------------------------------------------
@dataclass(frozen=True)
class TrackExchange:
    """Exchange of ``t_{i-1}`` and ``t_i``: source and target patch plus kernels."""

    i: int
    source: RectLattice
    target: RectLattice
    kernel: StarTriangleKernel
    plan: ExchangePlan | None

    @classmethod
    def build(cls, lattice: RectLattice, i: int, q: float,
              bc: BoundaryCondition | None = None) -> "TrackExchange":
        if i - 1 not in lattice.tracks or i not in lattice.tracks:
            raise IndexError(f"tracks t_{i - 1}, t_{i} are not both in the patch")
        a, b = lattice.track_angle(i - 1), lattice.track_angle(i)
        kernel = solve_kernel((a, b), q)
        plan = None if a == b else make_plan(lattice, i, bc)
        return cls(i, lattice, lattice.swapped(i), kernel, plan)

    @property
    def identity(self) -> bool:
        return self.plan is None

    @property
    def exact(self) -> bool:
        return self.plan is None or self.plan.exact

    def apply(self, config, rng: np.random.Generator):
        """Apply to ``config`` in place; returns ``(config, target lattice)``."""
        if self.plan is None:
            config.lattice = self.target
            return config, self.target
        plan = self.plan
        u = rng.random(len(plan.lower) + 1)
        q = self.kernel.q
        po = _start_probability(plan, self.kernel, q,
                                lambda: config.connected(*plan.start_ends))
        kink = 1 if u[0] < po else 0
        core.propagate_kink(config.full_state, plan.lower, plan.upper, plan.tables,
                            _cumulative(self.kernel), kink, u[1:])
        if not plan.exact:
            config.inexact_moves = getattr(config, "inexact_moves", 0) + 1
        config.lattice = self.target
        config.touch()
        return config, self.target

    def branches(self, state, bc: BoundaryCondition | None = None):
        """Exact output law for one input state: list of ``(probability, state)``."""
        state = np.asarray(state, dtype=np.uint8)
        if self.plan is None:
            return [(1.0, state.copy())]
        plan = self.plan
        q = self.kernel.q
        po = _start_probability(plan, self.kernel, q,
                                lambda: _joined(self.source, state, *plan.start_ends, bc))
        tables = self.kernel.tables()
        dist = {}
        for kink, pr in ((1, po), (0, 1.0 - po)):
            if pr > 0:
                dist[(kink, state.tobytes())] = pr
        for s in range(len(plan.lower)):
            lo, up, tab = int(plan.lower[s]), int(plan.upper[s]), int(plan.tables[s])
            nxt: dict = {}
            for (kink, raw), w in dist.items():
                st = np.frombuffer(raw, dtype=np.uint8)
                row = tables[tab, kink * 4 + int(st[lo]) * 2 + int(st[up])]
                for out in np.flatnonzero(row > 0):
                    new = st.copy()
                    new[lo] = (out >> 1) & 1
                    new[up] = out & 1
                    key = ((out >> 2) & 1, new.tobytes())
                    nxt[key] = nxt.get(key, 0.0) + w * row[out]
            dist = nxt
        merged: dict[bytes, float] = {}
        for (_, raw), w in dist.items():
            merged[raw] = merged.get(raw, 0.0) + w
        return [(w, np.frombuffer(raw, dtype=np.uint8).copy()) for raw, w in merged.items()]


_CUMULATIVE: dict[int, np.ndarray] = {}


def _cumulative(kernel: StarTriangleKernel) -> np.ndarray:
    key = id(kernel)
    c = _CUMULATIVE.get(key)
    if c is None:
        c = _CUMULATIVE[key] = kernel.cumulative()
        if len(_CUMULATIVE) > 1024:
            _CUMULATIVE.clear()
            _CUMULATIVE[key] = c
    return c


def _joined(lattice, state, u: int, v: int, bc) -> bool:
    topo = getattr(lattice, "topo", lattice)
    parent = list(range(topo.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if bc is not None:
        for cls_ in bc.wired_classes():
            for w in cls_[1:]:
                parent[find(w)] = find(cls_[0])
    for e in np.flatnonzero(np.asarray(state)[: topo.n_edges]):
        parent[find(int(topo.edge_u[e]))] = find(int(topo.edge_v[e]))
    return find(u) == find(v)


def track_exchange(config, lattice: RectLattice, i: int, rng: np.random.Generator,
                   q: float | None = None):
    """Exchange ``t_{i-1}`` and ``t_i`` in ``config`` (in place).

    Returns ``(config, swapped lattice)``; ``q`` defaults to the one recorded
    on the configuration.
    """
    q = config.q if q is None else q
    if config.lattice is not lattice and not config.lattice.same_structure(lattice):
        raise ValueError("configuration does not live on the given lattice")
    return TrackExchange.build(lattice, i, float(q), config.bc).apply(config, rng)


def exchange_kernel(lattice: RectLattice, i: int, q: float, bc: BoundaryCondition | None = None):
    """Exact randomised map of one exchange, for :func:`isofk.exact.exact_pushforward`."""
    te = TrackExchange.build(lattice, i, q, bc)
    return lambda state: te.branches(state, bc)


# -- sweeps ---------------------------------------------------------------------
def exchange_indices(lattice: RectLattice, parity: int, skip_block: int | None = None) -> list[int]:
    """Indices ``i`` of the given parity with both ``t_{i-1}`` and ``t_i`` in the patch,
    omitting ``i`` with ``i - 1`` divisible by ``skip_block``."""
    lo = lattice.row_min + 2
    out = [i for i in range(lo, lattice.row_max + 1) if i % 2 == parity % 2]
    if skip_block:
        out = [i for i in out if (i - 1) % skip_block != 0]
    return out


def _apply_all(config, lattice, indices, rng, q):
    for i in indices:
        config, lattice = track_exchange(config, lattice, i, rng, q)
    return config, lattice


def sweep_S_t(config, lattice: RectLattice, t: int, N: int, rng: np.random.Generator,
              q: float | None = None, expected: tuple[float, ...] | None = None):
    """One step of the block coupling.

    Odd ``t`` applies ``T_3, T_5, ...`` except those with ``i - 1`` a multiple of
    ``2N``; even ``t`` applies ``T_2, T_4, ...``.  ``expected`` optionally gives
    the track angles that ``lattice`` must have at this step.
    """
    if N < 2 or N % 2:
        raise ValueError("block size N must be even and positive")
    if expected is not None and tuple(expected) != tuple(lattice.track_angles):
        raise ValueError(f"lattice does not match step t={t} of the block schedule")
    if t % 2:
        idx = [i for i in exchange_indices(lattice, 1, 2 * N) if i >= 3]
    else:
        idx = exchange_indices(lattice, 0)
    return _apply_all(config, lattice, idx, rng, q)


def sweep_parallel(config, lattice: RectLattice, parity: str, rng: np.random.Generator,
                   q: float | None = None):
    """All ``T_{2k}`` (``parity='even'``) or all ``T_{2k-1}`` (``'odd'``) in the patch.

    Each applied pair must read (alpha, beta) bottom-up with the same alpha and
    beta throughout, as on the mixed lattice and its ``S_even`` image.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    idx = exchange_indices(lattice, 0 if parity == "even" else 1)
    pairs = {(lattice.track_angle(i - 1), lattice.track_angle(i)) for i in idx}
    if len(pairs) > 1:
        raise ValueError(f"{parity} sweep expects identical track pairs, found {sorted(pairs)}")
    return _apply_all(config, lattice, idx, rng, q)


__all__ = [
    "ExchangePlan", "KernelCache", "KernelError", "LocalGraph", "StarTriangleKernel",
    "TrackExchange", "WIRING_CLASSES", "exchange_indices", "exchange_is_exact", "exchange_kernel",
    "make_plan", "solve_kernel", "solve_transport", "sweep_S_t", "sweep_parallel",
    "track_exchange", "transport_residual",
]
