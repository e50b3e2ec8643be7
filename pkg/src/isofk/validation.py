"""Oracle checks shared by the ``validate`` command and the test suite.

Every check compares the production code against the exact enumeration in
:mod:`isofk.exact` or against closed-form identities, and returns a
:class:`Check` instead of raising so that a full report can be printed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import product

import numpy as np

from ._backend import core
from .dynamics import exchange_is_exact, exchange_kernel
from .exact import (BoundaryCondition, ExactMeasure, as_graph, connected_off, exact_pushforward,
                    mask_to_state, total_variation)
from .lattice import STRIP, WINDOW, AngleSequence, build_lattice
from .sampler import wired_graph
from .weights import WeightTable, critical_point, dual_weight, isoradial_weight

PI = math.pi


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


# -- sampler -----------------------------------------------------------------------------
def sweep_pushforward(probs: np.ndarray, graph, p: np.ndarray, q: float,
                      bc: BoundaryCondition | None = None, order=None) -> np.ndarray:
    """Law after one heat-bath sweep, by applying the single-edge kernels in turn."""
    g = as_graph(graph)
    m = g.n_edges
    order = range(m) if order is None else order
    dist = np.asarray(probs, float).copy()
    for e in order:
        new = np.zeros_like(dist)
        bit = 1 << e
        for mask in np.flatnonzero(dist):
            st = mask_to_state(int(mask), m)
            po = p[e] if connected_off(g, st, e, bc) else p[e] / (p[e] + q * (1 - p[e]))
            new[mask | bit] += dist[mask] * po
            new[mask & ~bit] += dist[mask] * (1 - po)
        dist = new
    return dist


def implementation_thresholds_agree(lattice, weights: WeightTable, bc=None, backend=None,
                                    delta: float = 1e-10) -> tuple[bool, int]:
    """Probe the production single-edge update just below and above the exact threshold.

    Returns ``(all agree, number of probes)``.
    """
    impl = backend or core
    g = as_graph(lattice)
    wg = wired_graph(lattice, bc)
    p = np.ascontiguousarray(weights.per_edge, float)
    q = float(weights.q)
    m = g.n_edges
    probes = 0
    for mask in range(1 << m):
        st = mask_to_state(mask, m)
        for e in range(m):
            po = p[e] if connected_off(g, st, e, bc) else p[e] / (p[e] + q * (1 - p[e]))
            for u, want in ((po - delta, 1), (po + delta, 0)):
                if not 0.0 <= u < 1.0:
                    continue
                full = wg.full_state(st)
                impl.heat_bath_sweep(wg.indptr, wg.nbr, wg.eid, wg.eu, wg.ev, full, p, q,
                                     np.array([u]), np.array([e], dtype=np.int64))
                probes += 1
                if full[e] != want:
                    return False, probes
    return True, probes


def stationarity_cases(max_edges: int = 12):
    """Small lattices with boundary conditions and weights used by the stationarity check."""
    shapes = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3), (3, 3), (4, 2), (2, 6), (3, 4),
              (4, 3), (6, 2)]
    seqs = [AngleSequence.constant(PI / 2), AngleSequence.alternating(PI / 3, 2 * PI / 3)]
    qs = [1.0, 2.0, 4.0, 4.5, 9.0]
    k = 0
    for (w, h), geom in product(shapes, (STRIP, WINDOW)):
        if w * h > max_edges:
            continue
        seq = seqs[k % 2]
        q = qs[k % len(qs)]
        lat = build_lattice(seq, w, h, geom)
        bnd = lat.topo.boundary_vertices
        bcs = [None, BoundaryCondition.wired(bnd)]
        if geom == STRIP and h > 1:
            bcs.append(BoundaryCondition.mixed(lat.topo.side_vertices("bottom"), bnd))
        for bc in bcs:
            yield lat, WeightTable.for_lattice(lat, q), bc
            k += 1


def check_sampler_stationarity(max_edges: int = 12, tol: float = 1e-9) -> Check:
    worst, n, probes = 0.0, 0, 0
    for lat, w, bc in stationarity_cases(max_edges):
        meas = ExactMeasure(lat, w.per_edge, w.q, bc)
        after = sweep_pushforward(meas.probabilities, lat, w.per_edge, w.q, bc)
        worst = max(worst, total_variation(after, meas.probabilities))
        ok, k = implementation_thresholds_agree(lat, w, bc)
        probes += k
        n += 1
        if not ok:
            return Check("sampler stationarity", False, f"implementation threshold mismatch on case {n}")
    return Check("sampler stationarity", worst < tol,
                 f"{n} graphs, worst TV {worst:.2e}, {probes} threshold probes")


def check_percolation_mode() -> Check:
    """At q = 1 every edge is refreshed independently with probability p_e."""
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 3, 3, WINDOW)
    w = WeightTable.for_lattice(lat, 1.0)
    meas = ExactMeasure(lat, w.per_edge, 1.0)
    masks = np.arange(len(meas.probabilities))
    bits = (masks[:, None] >> np.arange(lat.n_edges)) & 1
    product_law = np.prod(np.where(bits == 1, w.per_edge, 1 - w.per_edge), axis=1)
    ok, k = implementation_thresholds_agree(lat, w)
    tv = total_variation(meas.probabilities, product_law)
    return Check("q=1 percolation mode", ok and tv < 1e-12,
                 f"TV to product law {tv:.1e}, {k} probes")


# -- track exchanges ------------------------------------------------------------------
def outer_partition(lattice, state, i: int, bc: BoundaryCondition | None = None) -> tuple:
    """Connectivity of the vertices off the middle row ``i - 1`` of the two exchanged tracks."""
    g = as_graph(lattice)
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
        if state[e]:
            parent[find(g.edge_u[e])] = find(g.edge_v[e])
    rows = lattice.topo.vertex_rc[:, 0]
    outer = [v for v in range(g.n_vertices) if rows[v] != i - 1]
    first: dict[int, int] = {}
    return tuple(first.setdefault(find(v), k) for k, v in enumerate(outer))


def exchange_tv(a: float, b: float, q: float, width: int, col_min: int, wired: bool,
                check_connectivity: bool = True) -> tuple[float, bool]:
    """TV between the pushed-forward two-track strip law and the swapped-strip law."""
    lat = build_lattice(AngleSequence((a, b)), width, 2, STRIP, col_min=col_min)
    bc = BoundaryCondition.wired(lat.topo.boundary_vertices) if wired else None
    i = lat.row_min + 2
    w = WeightTable.for_lattice(lat, q)
    src = ExactMeasure(lat, w.per_edge, q, bc)
    tgt_lat = lat.swapped(i)
    wt = WeightTable.for_lattice(tgt_lat, q)
    tgt = ExactMeasure(tgt_lat, wt.per_edge, q, bc)
    kern = exchange_kernel(lat, i, q, bc)
    out = exact_pushforward(src, kern)
    conn_ok = True
    if check_connectivity:
        for mask in range(1 << lat.n_edges):
            st = mask_to_state(mask, lat.n_edges)
            before = outer_partition(lat, st, i, bc)
            for pr, new in kern(st):
                if pr > 0 and outer_partition(tgt_lat, new, i, bc) != before:
                    conn_ok = False
                    break
            if not conn_ok:
                break
    return total_variation(out, tgt.probabilities), conn_ok


def exchange_cases(widths=(1, 2, 3, 4)):
    """Exactly realisable exchange geometries: ``(width, col_min, wired)``.

    Wired boundary conditions admit every width and offset; free ones need both
    ends of the middle row to be primal.
    """
    for width in widths:
        for col_min in (0, 1):
            lat = build_lattice(AngleSequence((PI / 3, PI / 2)), width, 2, STRIP, col_min=col_min)
            bnd = lat.topo.boundary_vertices
            yield width, col_min, True
            if exchange_is_exact(lat, lat.row_min + 2, None):
                yield width, col_min, False
            assert exchange_is_exact(lat, lat.row_min + 2, BoundaryCondition.wired(bnd))


def check_exchange_exactness(angles=(PI / 3, PI / 2, 2 * PI / 3), qs=(1.0, 2.0, 4.0, 4.5, 9.0),
                             widths=(1, 2, 3, 4), tol: float = 1e-9) -> Check:
    worst, n, conn = 0.0, 0, True
    for a, b in product(angles, angles):
        for q in qs:
            for width, col_min, wired in exchange_cases(widths):
                tv, ok = exchange_tv(a, b, q, width, col_min, wired)
                worst = max(worst, tv)
                conn &= ok
                n += 1
    return Check("track-exchange exactness", worst < tol and conn,
                 f"{n} cases, worst TV {worst:.2e}, outer connectivity {'kept' if conn else 'BROKEN'}")


# -- weights ----------------------------------------------------------------------------
def check_weight_identities() -> Check:
    thetas = np.linspace(0.01, PI - 0.01, 50)
    qs = [1.0, 2.0, 4.0, 4.5, 9.0]
    worst_dual, worst_refl = 0.0, 0.0
    for th, q in product(thetas, qs):
        p = isoradial_weight(th, q)
        ps = dual_weight(p, q)
        worst_dual = max(worst_dual, abs(p / (1 - p) * ps / (1 - ps) / q - 1.0))
        worst_refl = max(worst_refl, abs(ps - isoradial_weight(PI - th, q)))
    worst_cont = 0.0
    for th in thetas:
        mid = isoradial_weight(th, 4.0)
        for q in (4.0 - 1e-8, 4.0 + 1e-8):
            worst_cont = max(worst_cont, abs(isoradial_weight(th, q) - mid))
    ok = worst_dual < 1e-12 and worst_refl < 1e-12 and worst_cont < 1e-6
    return Check("weight identities", ok,
                 f"duality {worst_dual:.1e}, reflection {worst_refl:.1e}, continuity {worst_cont:.1e}")


def check_critical_point() -> Check:
    worst = max(abs(isoradial_weight(PI / 2, q) - math.sqrt(q) / (1 + math.sqrt(q)))
                for q in (1.0, 2.0, 4.0, 9.0, 16.0))
    worst = max(worst, max(abs(critical_point(q) - math.sqrt(q) / (1 + math.sqrt(q)))
                           for q in (1.0, 2.0, 4.0, 9.0, 16.0)))
    return Check("critical point on the square lattice", worst < 1e-12, f"{worst:.1e}")


# -- kernel cache ---------------------------------------------------------------------
def check_kernel_cache(directory: str | None) -> Check:
    """Re-read and re-verify every cached kernel; any tampering fails."""
    from .dynamics import StarTriangleKernel

    if not directory or not os.path.isdir(directory):
        return Check("kernel cache", True, "no cache directory")
    n = 0
    for name in sorted(os.listdir(directory)):
        if not name.startswith("kernel_"):
            continue
        with open(os.path.join(directory, name)) as fh:
            try:
                StarTriangleKernel.from_text(fh.read(), verify=True)
            except Exception as exc:  # noqa: BLE001 - any failure is a failed check
                return Check("kernel cache", False, f"{name}: {exc}")
        n += 1
    return Check("kernel cache", True, f"{n} kernels re-verified")


def run_all(quick: bool = False, kernel_cache: str | None = None) -> list[Check]:
    checks = [check_weight_identities(), check_critical_point(), check_percolation_mode(),
              check_sampler_stationarity(8 if quick else 12)]
    if quick:
        checks.append(check_exchange_exactness(qs=(1.0, 4.0, 9.0), widths=(1, 2)))
    else:
        checks.append(check_exchange_exactness())
    checks.append(check_kernel_cache(kernel_cache or os.environ.get("ISOFK_KERNEL_CACHE")))
    return checks


__all__ = [
    "Check", "check_critical_point", "check_exchange_exactness", "check_kernel_cache",
    "check_percolation_mode", "check_sampler_stationarity", "check_weight_identities",
    "exchange_cases", "exchange_tv", "implementation_thresholds_agree", "outer_partition",
    "run_all", "stationarity_cases", "sweep_pushforward",
]
