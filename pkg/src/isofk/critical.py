"""Diagnostics at q = 4: crossings, half-plane three-arm events, flower domains
and the incipient infinite cluster seen from an extremum.

Geometry is measured on the planar embedding.  A configuration induces
open primal edges and, through ``e* open iff e closed``, open dual edges; the
dual lattice shares edge ids with the primal one.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .dynamics import sweep_parallel
from .exact import BoundaryCondition
from .lattice import WINDOW, AngleSequence, RectLattice, _extended_row_offsets, build_lattice
from .observables import e_theta, extremum_of, nearest_displacement, touches_edge
from .sampler import Configuration, heat_bath_sweep, new_chain, run_chain
from .weights import WeightTable

TOL = 1e-9


# -- helpers ----------------------------------------------------------------------
def _restricted_labels(topo, state: np.ndarray, keep: np.ndarray,
                       edge_keep: np.ndarray | None = None) -> np.ndarray:
    """Clusters of the open edges with both end points in ``keep`` (and in ``edge_keep``)."""
    eu, ev = topo.edge_u, topo.edge_v
    st = (np.asarray(state[: topo.n_edges], dtype=np.uint8) & keep[eu] & keep[ev]).astype(np.uint8)
    if edge_keep is not None:
        st &= edge_keep.astype(np.uint8)
    return core.label_clusters(topo.n_vertices, np.asarray(eu, np.int64),
                               np.asarray(ev, np.int64), st)


def dual_state(config: Configuration) -> np.ndarray:
    return (1 - config.state).astype(np.uint8)


def _anchor_projection(lattice: RectLattice, rc: np.ndarray, theta: float,
                       parity: int) -> np.ndarray:
    """Projection on ``e_theta`` of the anchor of the primal cell holding each diamond point.

    ``parity`` is the parity of the primal lattice, so dual points get the
    anchor of the primal cell they lie in.
    """
    ar = 2 * (rc[:, 0] // 2)
    ac = 2 * ((rc[:, 1] - parity) // 2) + parity
    z = ac + _extended_row_offsets(lattice, ar)
    return z.real * math.cos(theta) + z.imag * math.sin(theta)


def _point(lattice: RectLattice, z) -> tuple[tuple[int, int], np.ndarray]:
    """Diamond coordinates and planar position of ``z`` (vertex id or (row, col))."""
    if isinstance(z, (tuple, list)):
        rc = (int(z[0]), int(z[1]))
    else:
        rc = tuple(int(x) for x in lattice.topo.vertex_rc[int(z)])
    w = lattice.point_position(*rc)
    return rc, np.array([w.real, w.imag])


# -- crossings ----------------------------------------------------------------------
def rectangle_crossed(config: Configuration, x0: float, y0: float, width: float,
                      height: float) -> bool:
    """Left-right open crossing of ``[x0, x0+width] x [y0, y0+height]``."""
    lat = config.lattice
    pos = lat.positions
    inside = ((pos[:, 0] >= x0 - TOL) & (pos[:, 0] <= x0 + width + TOL)
              & (pos[:, 1] >= y0 - TOL) & (pos[:, 1] <= y0 + height + TOL))
    lab = _restricted_labels(lat.topo, config.state, inside.astype(np.uint8))
    left = inside & (pos[:, 0] < x0 + 1.0)
    right = inside & (pos[:, 0] > x0 + width - 1.0)
    return bool(np.intersect1d(lab[left], lab[right]).size)


def crossing_window(angles: AngleSequence, rho: float, n: float, eps: float = 0.25
                    ) -> tuple[RectLattice, tuple[float, float, float, float]]:
    """Window of ``(1 + 2 eps)`` times the rectangle, and the centred rectangle."""
    w_phys, h_phys = rho * n, n
    vals = angles.values
    row_h = float(np.mean([math.sin(a) for a in vals]))
    cols = int(math.ceil(w_phys * (1 + 2 * eps) + 2 * h_phys * (1 + 2 * eps) / math.tan(min(vals))))
    rows = int(math.ceil(h_phys * (1 + 2 * eps) / row_h)) + 2
    rows += rows % 2
    lat = build_lattice(angles, cols, rows, WINDOW, col_min=-(cols // 2))
    # centre the rectangle on the window's planar centre
    cx = float(np.mean(lat.positions[:, 0]))
    cy = float(np.mean(lat.positions[:, 1]))
    return lat, (cx - w_phys / 2, cy - h_phys / 2, w_phys, h_phys)


def window_bc(lattice: RectLattice, bc: str) -> BoundaryCondition | None:
    if bc == "free":
        return None
    if bc == "wired":
        return BoundaryCondition.wired(lattice.topo.boundary_vertices)
    raise ValueError(f"unknown boundary condition {bc!r}")


@dataclass
class Estimate:
    value: float
    se: float
    samples: int


def crossing_probability(angles: AngleSequence, rho: float, n: float, bc: str = "free",
                         replicas: int = 4, seed: int = 0, q: float = 4.0, eps: float = 0.25,
                         burn_in: int | None = None, measurements: int = 50, spacing: int = 2
                         ) -> Estimate:
    """Monte Carlo probability of a left-right crossing of a ``rho n x n`` rectangle."""
    lat, rect = crossing_window(angles, rho, n, eps)
    w = WeightTable.for_lattice(lat, q)
    vals = []
    for rep in range(replicas):
        chain = new_chain(lat, w, window_bc(lat, bc), seed=seed, stream=rep)
        run_chain(chain, burn_in)
        for _ in range(measurements):
            for _ in range(spacing):
                heat_bath_sweep(chain)
            vals.append(rectangle_crossed(chain.config, *rect))
    vals = np.asarray(vals, float)
    # replicas are independent; measurements within a replica are correlated
    per_rep = vals.reshape(replicas, -1).mean(axis=1)
    se = per_rep.std(ddof=1) / math.sqrt(replicas) if replicas > 1 else vals.std() / math.sqrt(len(vals))
    return Estimate(float(vals.mean()), float(se), len(vals))


# -- three arms in the half-plane --------------------------------------------------------
@dataclass
class ArmEvent3HP:
    """Dual, primal and dual arms (clockwise) across the half-annulus around ``z``."""

    z: tuple[int, int]
    r: float
    R: float
    theta: float
    occurs: bool
    arms: tuple[np.ndarray, ...] = ()


class _ArmGeometry:
    """Static arrays of one lattice (primal or dual) used by the arm search."""

    def __init__(self, lattice: RectLattice, theta: float, parity: int):
        topo = lattice.topo
        self.lattice = lattice
        self.rc = topo.vertex_rc
        self.pos = lattice.positions
        self.proj = _anchor_projection(lattice, self.rc, theta, parity)
        nb = []
        ok = []
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = self.rc[:, 0] + dr, self.rc[:, 1] + dc
            ok.append((rr >= topo.row_min) & (rr <= topo.row_max)
                      & (cc >= topo.col_min) & (cc <= topo.col_max))
            w = cc + _extended_row_offsets(lattice, rr)
            nb.append(np.stack([w.real, w.imag], axis=1))
        self.nb_pos = np.stack(nb)
        self.nb_ok = np.stack(ok)
        self.eu = np.asarray(topo.edge_u, np.int64)
        self.ev = np.asarray(topo.edge_v, np.int64)
        self.row_min, self.row_max = topo.row_min, topo.row_max
        self.n_columns = topo.n_columns
        self.row_first = np.searchsorted(self.rc[:, 0], np.arange(topo.row_min, topo.row_max + 2))
        steps = np.abs(np.diff(lattice.row_offsets.imag))
        self.row_height = float(steps.min())

    def window(self, zrow: int, R: float) -> tuple[int, int, int, int]:
        """Vertex and edge id ranges of the rows that can reach ``d_inf <= R + 1``."""
        span = int(math.ceil((R + 2) / self.row_height)) + 1
        lo = max(self.row_min, zrow - span)
        hi = min(self.row_max, zrow + span)
        v0, v1 = self.row_first[lo - self.row_min], self.row_first[hi - self.row_min + 1]
        e0 = (lo - self.row_min) * self.n_columns
        e1 = (hi - self.row_min) * self.n_columns
        return int(v0), int(v1), e0, e1


_GEOMETRY: dict[tuple, _ArmGeometry] = {}


def _geometry(lattice: RectLattice, theta: float, parity: int) -> _ArmGeometry:
    key = (id(lattice), float(theta), parity)
    g = _GEOMETRY.get(key)
    if g is None or g.lattice is not lattice:
        if len(_GEOMETRY) > 32:
            _GEOMETRY.clear()
        g = _GEOMETRY[key] = _ArmGeometry(lattice, theta, parity)
    return g


@dataclass
class _HalfAnnulus:
    """Region of one lattice restricted to a vertex/edge id window."""

    v0: int
    e0: int
    eu: np.ndarray
    ev: np.ndarray
    keep: np.ndarray
    edge_keep: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    phi: np.ndarray


def _half_annulus(geo: _ArmGeometry, zrow: int, zpos: np.ndarray, zproj: float, r: float,
                  R: float, theta: float, whole: bool = False) -> _HalfAnnulus:
    if whole:
        v0, v1, e0, e1 = 0, len(geo.rc), 0, len(geo.eu)
    else:
        v0, v1, e0, e1 = geo.window(zrow, R)
    d = geo.pos[v0:v1] - zpos
    dinf = np.abs(d).max(axis=1)
    keep = (dinf >= r - TOL) & (dinf <= R + TOL) & (geo.proj[v0:v1] <= zproj + TOL)
    u = -e_theta(theta)
    v = np.array([u[1], -u[0]])  # u turned clockwise, so phi grows clockwise
    phi = np.arctan2(d @ v, d @ u)
    # contacts: points with a diamond-grid neighbour beyond the inner or outer square
    nd = np.abs(geo.nb_pos[:, v0:v1] - zpos).max(axis=2)
    ok = geo.nb_ok[:, v0:v1]
    inner = keep & ((nd < r - TOL) & ok).any(axis=0)
    outer = keep & (((nd > R + TOL) & ok) | ~ok).any(axis=0)
    eu = geo.eu[e0:e1] - v0
    ev = geo.ev[e0:e1] - v0
    # edges running along a boundary layer would let arms slip past each other's end points
    edge_keep = (keep[eu] & keep[ev] & ~(inner[eu] & inner[ev]) & ~(outer[eu] & outer[ev]))
    return _HalfAnnulus(v0, e0, eu, ev, keep, edge_keep, inner, outer, phi)


def _open_labels(ha: _HalfAnnulus, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    st = (np.asarray(state[ha.e0:ha.e0 + len(ha.eu)], dtype=np.uint8)
          & ha.edge_keep).astype(np.uint8)
    return core.label_clusters(len(ha.keep), ha.eu, ha.ev, st), st


def _crossing_intervals(labels: np.ndarray, ha: _HalfAnnulus):
    """Labels of inner-to-outer crossings with the range of their inner contact angles."""
    cross = np.intersect1d(labels[ha.inner], labels[ha.outer])
    sel = ha.inner & np.isin(labels, cross)
    lab, phi = labels[sel], ha.phi[sel]
    if not len(lab):
        return cross, np.zeros(0), np.zeros(0)
    order = np.lexsort((phi, lab))
    lab, phi = lab[order], phi[order]
    first = np.r_[True, lab[1:] != lab[:-1]]
    last = np.r_[lab[1:] != lab[:-1], True]
    return lab[first], phi[first], phi[last]


def _local_path(ha: _HalfAnnulus, st: np.ndarray, labels: np.ndarray, cluster: int) -> np.ndarray:
    """Shortest open path inside the region from an inner to an outer contact of ``cluster``."""
    adj: dict[int, list[int]] = {}
    for k in np.flatnonzero(st):
        a, b = int(ha.eu[k]), int(ha.ev[k])
        if labels[a] == cluster:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
    starts = [int(v) for v in np.flatnonzero(ha.inner & (labels == cluster))]
    prev = {s: -1 for s in starts}
    dq = deque(starts)
    while dq:
        x = dq.popleft()
        if ha.outer[x]:
            path = [x]
            while prev[path[-1]] >= 0:
                path.append(prev[path[-1]])
            return np.array(path[::-1], dtype=np.int64) + ha.v0
        for y in adj.get(x, ()):
            if y not in prev:
                prev[y] = x
                dq.append(y)
    return np.zeros(0, dtype=np.int64)


def _regions(config: Configuration, z, r: float, R: float, theta: float, whole: bool = False):
    lat = config.lattice
    zrc, zpos = _point(lat, z)
    zproj = float(_anchor_projection(lat, np.array([zrc]), theta, lat.parity)[0])
    dual = lat.dual()
    gp = _geometry(lat, theta, lat.parity)
    gd = _geometry(dual, theta, lat.parity)
    ha_p = _half_annulus(gp, zrc[0], zpos, zproj, r, R, theta, whole)
    ha_d = _half_annulus(gd, zrc[0], zpos, zproj, r, R, theta, whole)
    return zrc, ha_p, ha_d


def detect_arm3hp(config: Configuration, z=(0, 0), r: float = 2.0, R: float = 8.0,
                  theta: float = 0.0, with_arms: bool = True) -> tuple[bool, ArmEvent3HP]:
    """Three alternating arms (dual, primal, dual) across ``r <= |x - z|_inf <= R``
    inside the half-plane ``<x - z, e_theta> <= 0`` (membership by cell anchor).

    Primal and dual crossing clusters of the half-annulus are found by
    labelling; each crossing is summarised by the angular range of its
    contacts with the inner boundary.  Disjoint crossings never interleave, so
    the event holds iff some primal crossing has a dual crossing entirely on
    each side of it.
    """
    zrc, ha_p, ha_d = _regions(config, z, r, R, theta)
    lab_p, st_p = _open_labels(ha_p, config.state)
    lab_d, st_d = _open_labels(ha_d, dual_state(config))
    cp, plo, phi_hi = _crossing_intervals(lab_p, ha_p)
    cd, dlo, dhi = _crossing_intervals(lab_d, ha_d)
    if not len(cp) or len(cd) < 2:
        return False, ArmEvent3HP(zrc, r, R, theta, False)
    good = (dhi.min() < plo) & (dlo.max() > phi_hi)
    if not good.any():
        return False, ArmEvent3HP(zrc, r, R, theta, False)
    k = int(np.flatnonzero(good)[0])
    arms: tuple[np.ndarray, ...] = ()
    if with_arms:
        left = int(cd[np.argmin(dhi)])
        right = int(cd[np.argmax(dlo)])
        arms = (_local_path(ha_d, st_d, lab_d, left), _local_path(ha_p, st_p, lab_p, int(cp[k])),
                _local_path(ha_d, st_d, lab_d, right))
    return True, ArmEvent3HP(zrc, r, R, theta, True, arms)


def arm3hp_bruteforce(config: Configuration, z=(0, 0), r: float = 2.0, R: float = 8.0,
                      theta: float = 0.0) -> bool:
    """Reference search by explicit enumeration of simple paths (small patches only).

    Looks for inner contact points ``d1, a, d3`` in clockwise order such that a
    simple open dual path leaves ``d1`` and ``d3`` and a simple open primal path
    leaves ``a``, each ending on the outer boundary of the half-annulus.
    """
    _, ha_p, ha_d = _regions(config, z, r, R, theta, whole=True)

    def starts_reaching_outer(topo, ha, state):
        ptr, nbr, eid = topo.adjacency
        found = []

        def dfs(x, seen):
            if ha.outer[x]:
                return True
            for k in range(ptr[x], ptr[x + 1]):
                y = int(nbr[k])
                if state[eid[k]] and ha.edge_keep[eid[k]] and y not in seen:
                    seen.add(y)
                    if dfs(y, seen):
                        return True
                    seen.discard(y)
            return False

        for s in np.flatnonzero(ha.inner):
            if dfs(int(s), {int(s)}):
                found.append(float(ha.phi[s]))
        return sorted(found)

    lat = config.lattice
    prim = starts_reaching_outer(lat.topo, ha_p, config.state)
    duals = starts_reaching_outer(lat.dual().topo, ha_d, dual_state(config))
    return any(any(d < a for d in duals) and any(d > a for d in duals) for a in prim)


def arm3hp_frequency(configs, centres, r: float, R: float, theta: float) -> Estimate:
    hits = [detect_arm3hp(cfg, z, r, R, theta, with_arms=False)[0] for cfg in configs for z in centres]
    p = float(np.mean(hits))
    return Estimate(p, math.sqrt(max(p * (1 - p), 1e-300) / len(hits)), len(hits))


def arm_exponent(radii_ratio, p_hat, p_se=None) -> tuple[float, float]:
    """Slope (and its standard error) of ``log P`` against ``log(R / r)``."""
    x = np.log(np.asarray(radii_ratio, float))
    p = np.asarray(p_hat, float)
    y = np.log(p)
    if p_se is None:
        w = np.ones_like(y)
    else:
        w = (p / np.asarray(p_se, float)) ** 2
    X = np.stack([x, np.ones_like(x)], axis=1)
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    slope, _ = cov @ (X.T @ (w * y))
    return float(-slope), float(math.sqrt(cov[0, 0]))


def arm_lattice(angles: AngleSequence, R_max: float, margin: int = 4) -> RectLattice:
    """Window holding the box of radius ``R_max`` around the origin with some room."""
    half = int(math.ceil(R_max)) + margin
    row_h = min(math.sin(a) for a in angles.values)
    rows = 2 * int(math.ceil(half / row_h))
    rows += (-rows) % 4
    probe = build_lattice(angles, 2, rows, WINDOW)
    shift = probe.row_offsets.real
    lo = -half - int(math.ceil(shift.max()))
    hi = half - int(math.floor(shift.min()))
    lo -= lo % 2
    return build_lattice(angles, hi - lo + 1, rows, WINDOW, col_min=lo)


def arm_centres(lattice: RectLattice, R: float, spacing: int = 4,
                clearance: float = 1.0) -> list[tuple[int, int]]:
    """Cell anchors on a grid whose boxes of radius ``R + clearance`` fit in the window."""
    topo = lattice.topo
    pos = lattice.positions
    xmin, xmax = pos[:, 0].min(), pos[:, 0].max()
    ymin, ymax = pos[:, 1].min(), pos[:, 1].max()
    out = []
    r0 = topo.row_min + (-topo.row_min) % 2
    c0 = topo.col_min + (-topo.col_min) % 2
    for r in range(r0, topo.row_max + 1, spacing):
        for c in range(c0, topo.col_max + 1, spacing):
            w = lattice.point_position(r, c)
            gap = R + clearance
            if (xmin + gap <= w.real <= xmax - gap) and (ymin + gap <= w.imag <= ymax - gap):
                out.append((r, c))
    return out


def arm_window_frequencies(angles: AngleSequence, r: float, radii, theta: float,
                           measurements: int = 50, seed: int = 0, stream: int = 0,
                           burn_in: int | None = None, spacing: int = 2, q: float = 4.0,
                           centre_spacing: int = 4, clearance: float | None = None
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Hits and trials of the half-plane three-arm event for each outer radius.

    One free-boundary chain; after every ``spacing`` sweeps the event is tested
    around all cell anchors of a grid whose boxes keep ``clearance`` (default
    half the largest radius) away from the free boundary, which favours dual arms.
    """
    radii = [float(R) for R in radii]
    if clearance is None:
        clearance = max(4.0, max(radii) / 2)
    lat = arm_lattice(angles, max(radii), margin=int(math.ceil(clearance)) + 2)
    centres = {R: arm_centres(lat, R, centre_spacing, clearance) for R in radii}
    chain = new_chain(lat, WeightTable.for_lattice(lat, q), None, seed=seed, stream=stream)
    run_chain(chain, burn_in)
    hits = np.zeros(len(radii), dtype=np.int64)
    trials = np.zeros(len(radii), dtype=np.int64)
    for _ in range(measurements):
        for _ in range(spacing):
            heat_bath_sweep(chain)
        for k, R in enumerate(radii):
            for z in centres[R]:
                hits[k] += detect_arm3hp(chain.config, z, r, R, theta, with_arms=False)[0]
                trials[k] += 1
    return hits, trials


# -- flower domains -----------------------------------------------------------------------
PRIMAL, DUAL = 1, 0


@dataclass
class FlowerDomain:
    """Component of ``z`` left unexplored by the clusters reaching ``d_inf = 2R``."""

    z: tuple[int, int]
    R: float
    points: np.ndarray               # diamond coordinates of the domain
    boundary: np.ndarray             # diamond coordinates of explored neighbours
    boundary_colour: np.ndarray      # PRIMAL / DUAL per boundary point
    boundary_angle: np.ndarray
    petals: list[tuple[int, np.ndarray]]  # (colour, indices into boundary)
    endpoints: np.ndarray            # planar endpoints of the petals
    centre: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def single_circuit(self) -> bool:
        return len(self.petals) == 1

    @property
    def n_petals(self) -> int:
        return 0 if self.single_circuit else len(self.petals)

    def well_separated(self, eta: float) -> bool:
        e = self.endpoints
        if len(e) < 2:
            return True
        d = np.hypot(*(e[:, None, :] - e[None, :, :]).transpose(2, 0, 1))
        iu = np.triu_indices(len(e), 1)
        return bool((d[iu] >= eta * self.R - TOL).all())


def _diamond_positions(lattice: RectLattice, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    offs = lattice.row_offsets[rows - lattice.row_min]
    w = cols + offs
    return np.stack([w.real, w.imag], axis=-1)


def explore_flower(config: Configuration, z=(0, 0), R: float = 8.0) -> FlowerDomain:
    """Explore the clusters touching ``d_inf = 2R`` down to ``d_inf = R``; return the
    unexplored component of ``z`` and its petal decomposition."""
    lat = config.lattice
    topo = lat.topo
    zrc, zpos = _point(lat, z)
    nr, nc = topo.n_tracks + 1, topo.n_columns + 1
    rows, cols = np.meshgrid(np.arange(topo.row_min, topo.row_max + 1),
                             np.arange(topo.col_min, topo.col_max + 1), indexing="ij")
    pos = _diamond_positions(lat, rows, cols)
    dinf = np.abs(pos - zpos).max(axis=-1)
    if (dinf[[0, -1], :].min() < 2 * R - TOL) or (dinf[:, [0, -1]].min() < 2 * R - TOL):
        raise ValueError("the box of radius 2R around z must lie inside the window")
    ring = (dinf >= R - TOL) & (dinf <= 2 * R + TOL)
    explored = np.zeros((nr, nc), dtype=bool)
    colour = np.full((nr, nc), -1)
    dual = lat.dual()
    for lattice, state, col in ((lat, config.state, PRIMAL), (dual, dual_state(config), DUAL)):
        t = lattice.topo
        rc = t.vertex_rc
        ii, jj = rc[:, 0] - t.row_min, rc[:, 1] - t.col_min
        keep = ring[ii, jj]
        lab = _restricted_labels(t, state, keep.astype(np.uint8))
        outer = keep & (dinf[ii, jj] > 2 * R - 1.0)
        hit = np.isin(lab, np.unique(lab[outer])) & keep
        explored[ii[hit], jj[hit]] = True
        colour[ii, jj] = col
    # unexplored component of z on the diamond grid
    zi, zj = zrc[0] - topo.row_min, zrc[1] - topo.col_min
    inside = dinf <= 2 * R + TOL
    seen = np.zeros((nr, nc), dtype=bool)
    if explored[zi, zj]:
        raise ValueError("z itself is explored; choose R with R > 0")
    seen[zi, zj] = True
    dq = deque([(zi, zj)])
    bnd: set[tuple[int, int]] = set()
    while dq:
        i, j = dq.popleft()
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < nr and 0 <= b < nc and inside[a, b] and not seen[a, b]:
                if explored[a, b]:
                    bnd.add((a, b))
                else:
                    seen[a, b] = True
                    dq.append((a, b))
    pts = np.argwhere(seen)
    bnd_arr = np.array(sorted(bnd), dtype=np.int64).reshape(-1, 2)
    bpos = pos[bnd_arr[:, 0], bnd_arr[:, 1]] if len(bnd_arr) else np.zeros((0, 2))
    bcol = colour[bnd_arr[:, 0], bnd_arr[:, 1]] if len(bnd_arr) else np.zeros(0, int)
    ang = np.arctan2(bpos[:, 1] - zpos[1], bpos[:, 0] - zpos[0]) if len(bnd_arr) else np.zeros(0)
    order = np.argsort(ang, kind="stable")
    bnd_arr, bpos, bcol, ang = bnd_arr[order], bpos[order], bcol[order], ang[order]
    petals: list[tuple[int, np.ndarray]] = []
    endpoints = []
    if len(bcol) and (bcol == bcol[0]).all():
        petals = [(int(bcol[0]), np.arange(len(bcol)))]
    elif len(bcol):
        change = np.flatnonzero(bcol != np.roll(bcol, 1))  # k where a new run starts
        for s, e in zip(change, np.roll(change, -1)):
            idx = np.arange(s, e if e > s else e + len(bcol)) % len(bcol)
            petals.append((int(bcol[s]), idx))
            endpoints.append(0.5 * (bpos[s] + bpos[s - 1]))
    off = np.array([topo.row_min, topo.col_min])
    return FlowerDomain(zrc, R, pts + off, bnd_arr + off, bcol, ang, petals,
                        np.array(endpoints).reshape(-1, 2), zpos)


def in_cone(points: np.ndarray, centre: np.ndarray, theta: float,
            half_aperture: float = math.pi / 4) -> np.ndarray:
    d = np.asarray(points, float) - centre
    u = -e_theta(theta)
    cosang = (d @ u) / np.maximum(np.hypot(d[:, 0], d[:, 1]), 1e-300)
    return cosang >= math.cos(half_aperture) - TOL


def is_good_flower(fd: FlowerDomain, theta: float, eta: float = 0.25) -> bool:
    """Exactly two petals, ``eta``-well separated, primal petal in the cone around ``-e_theta``."""
    if fd.single_circuit or fd.n_petals != 2:
        return False
    if not fd.well_separated(eta):
        return False
    primal = [idx for col, idx in fd.petals if col == PRIMAL]
    if len(primal) != 1:
        return False
    return bool(in_cone(fd.endpoints, fd.centre, theta).all())


# -- incipient infinite cluster -------------------------------------------------------------
@dataclass
class IICSample:
    """A window configuration with a cluster whose extremum is the cell anchor ``z``.

    ``z`` plays the role of the origin: the cluster contains the vertex nearest
    to ``z - n e_theta`` and ``Ext_theta`` of the cluster is the cell of ``z``.
    """

    config: Configuration
    theta: float
    n: float
    window_radius: float
    z: tuple[int, int]
    x_n: int
    E: float
    acceptance_rate: float


def iic_lattice(alpha: float, beta: float, n: float, window_radius: float,
                margin: int = 4) -> RectLattice:
    """Window on the mixed lattice large enough for conditioning at distance ``n``."""
    half = int(math.ceil(n + window_radius + margin))
    height = 2 * half
    height += (-height) % 4
    return build_lattice(AngleSequence.alternating(alpha, beta), 2 * half, height, WINDOW,
                         col_min=-half - (half % 2))


def iic_candidates(config: Configuration, theta: float, n: float, window_radius: float
                   ) -> list[tuple[tuple[int, int], int, float]]:
    """All (anchor z, x_n vertex, E) in ``config`` with ``Ext_theta(C_{x_n(z)}) = z``.

    Uses translation invariance of the mixed lattice by whole cells; ``z``
    must have the box of radius ``window_radius`` inside the window and the
    cluster must stay off the window's sides.
    """
    from .observables import cluster_extrema

    lat = config.lattice
    topo = lat.topo
    lab = config.labels()
    dr, dc = nearest_displacement(lat, theta, -n) if n else (0, 0)
    ext = cluster_extrema(config, theta)
    out = []
    margin = int(math.ceil(window_radius)) + 1
    for c, (v, E) in ext.items():
        ar, ac = (int(x) for x in lat.vertex_anchor[v])
        if not (topo.row_min + margin <= ar <= topo.row_max - margin
                and topo.col_min + margin <= ac <= topo.col_max - margin):
            continue
        xr, xc = ar + dr, ac + dc
        if not topo.has_vertex(xr, xc):
            continue
        x = topo.vertex_id(xr, xc)
        if lab[x] != c:
            continue
        members = np.flatnonzero(lab == c)
        if touches_edge(lat, members):
            continue
        out.append(((ar, ac), x, E))
    return out


def iic_sample(theta: float, n: float, window_radius: float, q: float = 4.0,
               alpha: float = math.pi / 3, beta: float = math.pi / 2, seed: int = 0,
               attempts: int = 100, burn_in: int | None = None, spacing: int = 4,
               stream: int = 0) -> list[IICSample]:
    """Rejection sampling of configurations seen from a conditioned extremum.

    Draws up to ``attempts`` configurations from one chain and returns every
    accepted (configuration, cluster) pair; raises when none is accepted.
    """
    lat = iic_lattice(alpha, beta, n, window_radius)
    chain = new_chain(lat, WeightTable.for_lattice(lat, q), None, seed=seed, stream=stream)
    run_chain(chain, burn_in)
    found: list[tuple[Configuration, tuple]] = []
    for k in range(attempts):
        for _ in range(spacing):
            heat_bath_sweep(chain)
        cfg = chain.config.copy()
        for cand in iic_candidates(cfg, theta, n, window_radius):
            found.append((cfg, cand))
    if not found:
        raise RuntimeError(f"no conditioned cluster in {attempts} attempts; raise the budget")
    rate = len(found) / attempts
    return [IICSample(cfg, theta, n, window_radius, z, x, E, rate) for cfg, (z, x, E) in found]


def _trace(config: Configuration, members: np.ndarray, row_parity: int) -> int | None:
    """A member on a row of the given parity, preferring the one nearest the window centre."""
    rc = config.lattice.topo.vertex_rc[members]
    sel = members[rc[:, 0] % 2 == row_parity]
    if not len(sel):
        return None
    pos = config.lattice.positions[sel]
    return int(sel[np.argmin(np.hypot(pos[:, 0], pos[:, 1]))])


def iic_increments(samples: list[IICSample], rng: np.random.Generator, q: float = 4.0
                   ) -> list[float | None]:
    """Apply ``S_odd o S_even`` once to the shared configuration and return the
    change of ``E_theta`` of each sample's cluster (``None`` if it cannot be traced).

    The image of a cluster is followed through vertices that stay fixed:
    an even-row member through ``S_even``, then an odd-row member through ``S_odd``.
    """
    if not samples:
        return []
    cfg0 = samples[0].config
    if any(s.config is not cfg0 for s in samples):
        raise ValueError("samples must share one configuration")
    cfg = cfg0.copy()
    lab0 = cfg0.labels()
    starts = []
    for s in samples:
        members = np.flatnonzero(lab0 == lab0[s.x_n])
        starts.append(_trace(cfg0, members, 0))
    cfg, lat = sweep_parallel(cfg, cfg.lattice, "even", rng, q)
    lab1 = cfg.labels()
    mids = []
    for v in starts:
        if v is None:
            mids.append(None)
            continue
        mids.append(_trace(cfg, np.flatnonzero(lab1 == lab1[v]), 1))
    cfg, lat = sweep_parallel(cfg, lat, "odd", rng, q)
    lab2 = cfg.labels()
    out: list[float | None] = []
    for s, v in zip(samples, mids):
        if v is None:
            out.append(None)
            continue
        new = extremum_of(lat, np.flatnonzero(lab2 == lab2[v]), s.theta)
        out.append(new.E - s.E)
    return out


def iic_increment(sample: IICSample, rng: np.random.Generator, q: float = 4.0) -> float | None:
    return iic_increments([sample], rng, q)[0]


# -- multi-scale relations ---------------------------------------------------------------------
def quasi_multiplicativity_ratio(p_rR: float, p_rrho: float, p_rhoR: float) -> float:
    """``P(r, R) / (P(r, rho) P(rho, R))``; bounded above and below when quasi-multiplicative."""
    return p_rR / (p_rrho * p_rhoR)


def mixing_defect(p_ab: float, p_a: float, p_b: float) -> float:
    """``|P(A and B) - P(A) P(B)| / (P(A) P(B))``."""
    return abs(p_ab - p_a * p_b) / (p_a * p_b)


def fit_power(x, y) -> tuple[float, float]:
    """Least-squares ``log y = log C + c log x``; returns ``(C, c)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    c, logC = np.polyfit(lx, ly, 1)
    return float(math.exp(logC)), float(c)


__all__ = [
    "ArmEvent3HP", "DUAL", "Estimate", "FlowerDomain", "IICSample", "PRIMAL", "arm3hp_bruteforce",
    "arm3hp_frequency", "arm_centres", "arm_exponent", "arm_lattice", "arm_window_frequencies",
    "crossing_probability", "crossing_window",
    "detect_arm3hp", "dual_state", "explore_flower", "fit_power", "iic_candidates",
    "iic_increment", "iic_increments", "iic_lattice", "iic_sample", "in_cone", "is_good_flower",
    "mixing_defect", "quasi_multiplicativity_ratio", "rectangle_crossed", "window_bc",
]
