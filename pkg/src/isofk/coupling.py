"""Block exchange coupling on a half-plane strip.

``L_0`` has blocks of ``N`` tracks alternating between ``alpha`` (tracks
``2kN+1 .. (2k+1)N``) and ``beta``.  The steps ``S_t`` exchange the blocks
through a growing and shrinking mixed block; after ``2N`` steps every
``alpha`` block has swapped places with the ``beta`` block above it.  Each
configuration ``omega_{t+1} = S_t(omega_t)`` has the free measure of
``L_{t+1}``, and the trace follows the extremal coordinate of the cluster of
the origin along the way.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import sweep_S_t
from .lattice import STRIP, AngleSequence, RectLattice, build_lattice
from .observables import cluster_of, extremum_of, origin_vertex, touches_lateral_edge
from .sampler import ChainState, make_rng, new_chain, run_chain
from .weights import WeightTable

PURE_BLOCK, NEAR_INTERFACE, MIXED_BLOCK = 1, 2, 3
CASE_NAMES = {PURE_BLOCK: "pure-block", NEAR_INTERFACE: "near-interface", MIXED_BLOCK: "mixed-block"}
TRACE_COLUMNS = ("replica", "t", "E", "delta", "bin", "case")


def step_indices(t: int, N: int, n_tracks: int) -> list[int]:
    """Indices ``i`` of the exchanges ``T_i`` making up ``S_t`` on tracks ``1..n_tracks``."""
    if t % 2:
        return [i for i in range(3, n_tracks + 1, 2) if (i - 1) % (2 * N)]
    return list(range(2, n_tracks + 1, 2))


@dataclass
class BlockSchedule:
    """Track angles of ``L_t``, recomputed from ``L_0`` by applying the swaps."""

    alpha: float
    beta: float
    N: int
    n_tracks: int
    t: int = 0
    angles: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError("block size N must be even and at least 2")
        if self.n_tracks % (2 * self.N):
            raise ValueError("the strip must hold a whole number of periods of 2N tracks")
        if not self.angles:
            self.angles = list(AngleSequence.blocks(self.alpha, self.beta, self.N)
                               .window(1, self.n_tracks))

    @classmethod
    def at(cls, alpha: float, beta: float, N: int, n_tracks: int, t: int) -> "BlockSchedule":
        s = cls(alpha, beta, N, n_tracks)
        for _ in range(t):
            s.advance()
        return s

    def advance(self) -> "BlockSchedule":
        for i in step_indices(self.t, self.N, self.n_tracks):
            self.angles[i - 2], self.angles[i - 1] = self.angles[i - 1], self.angles[i - 2]
        self.t += 1
        return self

    def counts(self) -> list[tuple[int, int]]:
        """Numbers of alpha and beta tracks in every period."""
        p = 2 * self.N
        out = []
        for k in range(self.n_tracks // p):
            seg = self.angles[k * p:(k + 1) * p]
            a = sum(1 for x in seg if x == self.alpha)
            out.append((a, len(seg) - a))
        return out

    def blocks(self) -> list[tuple[int, int, str]]:
        """``(first_track, last_track, kind)`` with kind 'alpha', 'beta' or 'mixed'.

        Per period: the longest constant run at the bottom, the longest constant
        run at the top, and the alternating tracks in between.
        """
        p = 2 * self.N
        out = []
        for k in range(self.n_tracks // p):
            lo = k * p + 1
            seg = self.angles[k * p:(k + 1) * p]
            if self.alpha == self.beta:
                out.append((lo, lo + p - 1, "alpha"))
                continue
            b = 1
            while b < p and seg[b] == seg[0]:
                b += 1
            if b == p:
                out.append((lo, lo + p - 1, self._name(seg[0])))
                continue
            e = p - 1
            while seg[e - 1] == seg[-1]:
                e -= 1
            out.append((lo, lo + b - 1, self._name(seg[0])))
            if e > b:
                out.append((lo + b, lo + e - 1, "mixed"))
            out.append((lo + e, lo + p - 1, self._name(seg[-1])))
        return out

    def _name(self, angle: float) -> str:
        return "alpha" if angle == self.alpha else "beta"

    def interfaces(self) -> list[int]:
        """Diamond rows separating blocks, the horizontal axis (row 0) included."""
        rows = {0}
        for first, last, _ in self.blocks():
            rows.add(first - 1)
            rows.add(last)
        rows.discard(self.n_tracks)
        return sorted(rows)

    def lattice(self, width: int, col_min: int | None = None) -> RectLattice:
        seq = AngleSequence(tuple(self.angles))
        return build_lattice(seq, width, self.n_tracks, STRIP, col_min=col_min)


def classify_case(lattice: RectLattice, schedule: BlockSchedule, z: tuple[int, int],
                  R: float = 8.0, pure_margin: float = 4.0) -> int:
    """Case of the point with diamond coordinates ``z`` relative to the block structure.

    1: inside a pure block at distance at least ``pure_margin`` from every interface;
    2: otherwise within ``R`` of an interface; 3: in the mixed block, at least ``R`` away.
    """
    row = int(z[0])
    y = lattice.point_position(min(max(row, lattice.row_min), lattice.row_max), 0).imag
    ys = [lattice.point_position(k, 0).imag for k in schedule.interfaces()]
    d = min(abs(y - yi) for yi in ys)
    kind = "mixed"
    for first, last, k in schedule.blocks():
        if first - 1 <= row <= last:
            kind = k
            break
    if kind != "mixed" and d >= pure_margin:
        return PURE_BLOCK
    if d < R:
        return NEAR_INTERFACE
    return MIXED_BLOCK if kind == "mixed" else PURE_BLOCK


@dataclass
class IncrementTrace:
    """``E(C_t)`` at every even ``t`` (final time included) with increments, bins and case tags."""

    replica: int
    t: list[int] = field(default_factory=list)
    E: list[float] = field(default_factory=list)
    delta: list[float] = field(default_factory=list)
    bins: list[int] = field(default_factory=list)
    cases: list[int] = field(default_factory=list)
    touched_lateral: bool = False
    inexact_moves: int = 0

    @property
    def E_final(self) -> float:
        return self.E[-1]

    def rows(self):
        for k in range(len(self.delta)):
            yield (self.replica, self.t[k], self.E[k], self.delta[k], self.bins[k], self.cases[k])


def run_block_coupling(alpha: float, beta: float, N: int, q: float, width: int, theta: float,
                       steps: int | None = None, seed: int = 0, replica: int = 0,
                       n_tracks: int | None = None, eps: float = 1.0, R: float = 8.0,
                       burn_in: int | None = None, check_schedule: bool = True
                       ) -> tuple[IncrementTrace, ChainState]:
    """Sample ``omega_0`` on ``L_0`` and apply ``S_0, S_1, ...`` for ``steps`` steps (default ``2N``)."""
    if abs(math.remainder(theta - 1.5 * math.pi, 2 * math.pi)) < 1e-12:
        raise ValueError("theta = 3pi/2 points into the free boundary")
    n_tracks = n_tracks or 2 * N
    steps = 2 * N if steps is None else steps
    sched = BlockSchedule(alpha, beta, N, n_tracks)
    lat = sched.lattice(width)
    chain = new_chain(lat, WeightTable.for_lattice(lat, q), None, seed=seed, stream=replica)
    run_chain(chain, burn_in)
    rng = make_rng(seed, 1_000_003 + replica)
    trace = IncrementTrace(replica)
    origin = origin_vertex(lat)
    cfg = chain.config
    cfg.inexact_moves = 0

    def observe(t):
        members = cluster_of(cfg, origin)
        ext = extremum_of(cfg.lattice, members, theta)
        trace.touched_lateral |= touches_lateral_edge(cfg.lattice, members)
        trace.t.append(t)
        trace.E.append(ext.E)
        trace.bins.append(int(math.floor(ext.E / eps)))
        trace.cases.append(classify_case(cfg.lattice, sched, ext.anchor, R))

    observe(0)
    for t in range(steps):
        expected = tuple(sched.angles) if check_schedule else None
        cfg, lat = sweep_S_t(cfg, cfg.lattice, t, N, rng, q, expected)
        sched.advance()
        if (t + 1) % 2 == 0:
            observe(t + 1)
    trace.delta = [b - a for a, b in zip(trace.E[:-1], trace.E[1:])]
    m = len(trace.delta)
    trace.t, trace.bins, trace.cases = trace.t[:m], trace.bins[:m], trace.cases[:m]
    trace.inexact_moves = cfg.inexact_moves
    chain.config = cfg
    return trace, chain


def admissible_times(N: int, delta: float) -> tuple[tuple[float, float], tuple[float, float]]:
    return (1.0, (1 - delta) * N), ((1 + delta) * N, 2.0 * N)


def _admissible(t: int, N: int, delta: float) -> bool:
    (a, b), (c, d) = admissible_times(N, delta)
    return a <= t <= b or c <= t <= d


@dataclass
class DriftEstimate:
    mean: float
    se: float
    count: int


def bootstrap_se(values, rng: np.random.Generator, resamples: int = 400) -> float:
    v = np.asarray(values, float)
    if len(v) < 2:
        return math.inf
    idx = rng.integers(0, len(v), size=(resamples, len(v)))
    return float(v[idx].mean(axis=1).std(ddof=1))


def conditional_drift(traces, eps: float, bin_n: int | None, N: int, delta: float = 0.1,
                      t_value: int | None = None, case: int | None = None, seed: int = 0
                      ) -> DriftEstimate:
    """Mean of ``Delta_t E`` given ``E(C_t)`` in bin ``bin_n`` over admissible ``t``.

    ``bin_n=None`` pools all bins; ``t_value`` and ``case`` narrow the selection.
    Bins are recomputed from ``E`` with width ``eps``.
    """
    vals = []
    for tr in traces:
        for t, e, d, c in zip(tr.t, tr.E, tr.delta, tr.cases):
            if not _admissible(t, N, delta):
                continue
            if bin_n is not None and math.floor(e / eps) != bin_n:
                continue
            if t_value is not None and t != t_value:
                continue
            if case is not None and c != case:
                continue
            vals.append(d)
    if not vals:
        return DriftEstimate(math.nan, math.inf, 0)
    return DriftEstimate(float(np.mean(vals)), bootstrap_se(vals, make_rng(seed, 77)), len(vals))


def drift_cells(traces, eps: float, N: int, delta: float = 0.1, seed: int = 0
                ) -> dict[tuple[int, int], DriftEstimate]:
    """Conditional drift in every admissible ``(t, bin)`` cell that has data."""
    keys = set()
    for tr in traces:
        for t, e in zip(tr.t, tr.E):
            if _admissible(t, N, delta):
                keys.add((t, int(math.floor(e / eps))))
    return {k: conditional_drift(traces, eps, k[1], N, delta, t_value=k[0], seed=seed)
            for k in sorted(keys)}


def trace_csv(traces, manifest_hash: str | None = None) -> str:
    buf = io.StringIO()
    if manifest_hash:
        buf.write(f"# manifest-sha256={manifest_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for tr in traces:
        for row in tr.rows():
            w.writerow([row[0], row[1], repr(float(row[2])), repr(float(row[3])), row[4],
                        CASE_NAMES[row[5]]])
    return buf.getvalue()


@dataclass
class HyperplaneComparison:
    n: float
    N: int
    p_before: float
    se_before: float
    p_after: float
    se_after: float
    eta: float
    runs: int

    @property
    def ratio(self) -> float:
        return self.p_after / self.p_before if self.p_before > 0 else math.inf

    def holds(self, sigmas: float = 3.0) -> bool:
        """``P[E_2N >= (1 - eta) n] >= eta P[E_0 >= n]`` not rejected at ``sigmas``."""
        se = math.hypot(self.se_after, self.eta * self.se_before)
        return self.p_after - self.eta * self.p_before >= -sigmas * se


def compare_hyperplane_decay(alpha: float, beta: float, q: float, theta: float, C: float,
                             n_grid, runs: int = 20, width: int = 32, eta: float = 0.5,
                             seed: int = 0, burn_in: int | None = None
                             ) -> list[HyperplaneComparison]:
    """Paired estimates of ``P[E(C_0) >= n]`` and ``P[E(C_2N) >= (1 - eta) n]`` with ``N ~ C n``."""
    out = []
    for n in n_grid:
        N = max(2, int(round(C * n)))
        N += N % 2
        before, after = [], []
        for rep in range(runs):
            tr, _ = run_block_coupling(alpha, beta, N, q, width, theta, seed=seed, replica=rep,
                                       burn_in=burn_in, check_schedule=False)
            before.append(tr.E[0] >= n - 1e-9)
            after.append(tr.E_final >= (1 - eta) * n - 1e-9)
        b, a = np.mean(before), np.mean(after)
        out.append(HyperplaneComparison(float(n), N, float(b), float(np.sqrt(b * (1 - b) / runs)),
                                        float(a), float(np.sqrt(a * (1 - a) / runs)), eta, runs))
    return out


def truncation_control(config, theta: float, n: float, height_limit: int) -> tuple[bool, bool]:
    """``(0 <-> H_n, 0 <-> H_n using only tracks up to height_limit)`` for one configuration."""
    from .observables import e_theta
    from ._backend import core

    lat = config.lattice
    topo = lat.topo
    origin = origin_vertex(lat)
    proj = lat.positions @ e_theta(theta)
    target = proj[origin] + n - 1e-9
    lab = config.labels()
    full = bool((proj[lab == lab[origin]] >= target).any())
    keep = (topo.edge_track <= height_limit).astype(np.uint8)
    st = (config.state & keep).astype(np.uint8)
    lab2 = core.label_clusters(topo.n_vertices, np.asarray(topo.edge_u, np.int64),
                               np.asarray(topo.edge_v, np.int64), st)
    below = bool((proj[lab2 == lab2[origin]] >= target).any())
    return full, below


__all__ = [
    "BlockSchedule", "CASE_NAMES", "DriftEstimate", "HyperplaneComparison", "IncrementTrace",
    "MIXED_BLOCK", "NEAR_INTERFACE", "PURE_BLOCK", "TRACE_COLUMNS", "admissible_times",
    "bootstrap_se", "classify_case", "compare_hyperplane_decay", "conditional_drift", "drift_cells",
    "run_block_coupling", "step_indices", "trace_csv", "truncation_control",
]
