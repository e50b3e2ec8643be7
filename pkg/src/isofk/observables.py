"""Clusters, directional extrema, connection profiles, decay rates and Wulff shapes."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exact import BoundaryCondition
from .lattice import STRIP, AngleSequence, RectLattice, build_lattice
from .sampler import Configuration, heat_bath_sweep, new_chain, run_chain
from .weights import WeightTable

TIE_TOL = 1e-9


def e_theta(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


# -- clusters -------------------------------------------------------------------
def clusters(config: Configuration) -> np.ndarray:
    """Cluster label of every primal vertex (boundary wirings included)."""
    return config.labels()


def origin_vertex(lattice: RectLattice) -> int:
    return lattice.topo.vertex_id(0, 0)


def cluster_of(config: Configuration, vertex: int) -> np.ndarray:
    lab = config.labels()
    return np.flatnonzero(lab == lab[vertex])


def touches_edge(lattice: RectLattice, vertices) -> bool:
    """Does the vertex set meet a side of the window (the bottom of a strip excepted)?"""
    rc = lattice.topo.vertex_rc[np.asarray(vertices, dtype=np.int64)]
    hit = (rc[:, 1] == lattice.col_min) | (rc[:, 1] == lattice.col_max) | (rc[:, 0] == lattice.row_max)
    if lattice.geometry != STRIP:
        hit |= rc[:, 0] == lattice.row_min
    return bool(hit.any())


def touches_lateral_edge(lattice: RectLattice, vertices) -> bool:
    rc = lattice.topo.vertex_rc[np.asarray(vertices, dtype=np.int64)]
    return bool(((rc[:, 1] == lattice.col_min) | (rc[:, 1] == lattice.col_max)).any())


# -- extrema ----------------------------------------------------------------------
@dataclass(frozen=True)
class DirectionalExtremum:
    """Cell anchor maximising the projection on ``e_theta`` among cells meeting a cluster."""

    theta: float
    anchor: tuple[int, int]
    position: tuple[float, float]
    E: float
    touches_edge: bool = False


def extremum_of(lattice: RectLattice, vertices, theta: float) -> DirectionalExtremum:
    """Extremum of the cells meeting ``vertices``; ties go to the highest, then rightmost anchor."""
    vertices = np.asarray(vertices, dtype=np.int64)
    pos = lattice.anchor_positions[vertices]
    proj = pos @ e_theta(theta)
    best = proj.max()
    cand = np.flatnonzero(proj >= best - TIE_TOL)
    if len(cand) > 1:
        order = np.lexsort((pos[cand, 0], pos[cand, 1]))
        k = cand[order[-1]]
    else:
        k = cand[0]
    anchor = tuple(int(x) for x in lattice.vertex_anchor[vertices[k]])
    return DirectionalExtremum(theta, anchor, (float(pos[k, 0]), float(pos[k, 1])), float(proj[k]),
                               touches_edge(lattice, vertices))


def extremum(config: Configuration, theta: float, vertex: int | None = None) -> DirectionalExtremum:
    """Extremum of the cluster of ``vertex`` (default: the origin)."""
    lat = config.lattice
    v = origin_vertex(lat) if vertex is None else vertex
    return extremum_of(lat, cluster_of(config, v), theta)


def cluster_extrema(config: Configuration, theta: float) -> dict[int, tuple[int, float]]:
    """For every cluster label: (vertex realising the extremum, E), same tie rule."""
    lat = config.lattice
    lab = config.labels()
    pos = lat.anchor_positions
    proj = pos @ e_theta(theta)
    # sort so the last entry per label is the extremum under the tie rule
    key_proj = np.round(proj / TIE_TOL) * TIE_TOL
    order = np.lexsort((pos[:, 0], pos[:, 1], key_proj, lab))
    last = np.ones(len(order), dtype=bool)
    last[:-1] = lab[order[1:]] != lab[order[:-1]]
    out = {}
    for v in order[last]:
        out[int(lab[v])] = (int(v), float(proj[v]))
    return out


# -- hyperplane events ------------------------------------------------------------
def projections(lattice: RectLattice, theta: float) -> np.ndarray:
    return lattice.positions @ e_theta(theta)


def hyperplane_connected(config: Configuration, theta: float, n: float,
                         vertex: int | None = None) -> bool:
    """Does the cluster of ``vertex`` (default origin) meet ``{x : <x - vertex, e_theta> >= n}``?"""
    lat = config.lattice
    v = origin_vertex(lat) if vertex is None else vertex
    proj = projections(lat, theta)
    members = cluster_of(config, v)
    return bool(proj[members].max() - proj[v] >= n - TIE_TOL)


def hyperplane_truncated(lattice: RectLattice, theta: float, n: float,
                         vertex: int | None = None) -> bool:
    """True when the window does not reach the half-space at distance ``n``."""
    v = origin_vertex(lattice) if vertex is None else vertex
    proj = projections(lattice, theta)
    return bool(proj.max() - proj[v] < n)


def cluster_max_projection(config: Configuration, theta: float) -> np.ndarray:
    """Per vertex: the largest projection on ``e_theta`` over its cluster."""
    lab = config.labels()
    proj = projections(config.lattice, theta)
    best = np.full(lab.max() + 1, -np.inf)
    np.maximum.at(best, lab, proj)
    return best[lab]


# -- displacement helpers -----------------------------------------------------------
def nearest_displacement(lattice: RectLattice, theta: float, n: float,
                         vertex: int | None = None) -> tuple[int, int]:
    """Label offset (dr, dc) from ``vertex`` to the primal vertex nearest ``vertex + n e_theta``.

    Ties go to the lexicographically smallest planar coordinate.
    """
    v = origin_vertex(lattice) if vertex is None else vertex
    x0 = lattice.positions[v]
    target = x0 + n * e_theta(theta)
    w = lattice.nearest_vertex(float(target[0]), float(target[1]))
    r0, c0 = lattice.topo.vertex_rc[v]
    r1, c1 = lattice.topo.vertex_rc[w]
    return int(r1 - r0), int(c1 - c0)


def label_grid(config: Configuration) -> np.ndarray:
    """Cluster labels laid out on the diamond grid; -1 on dual points."""
    topo = config.lattice.topo
    grid = np.full((topo.n_tracks + 1, topo.n_columns + 1), -1, dtype=np.int64)
    rc = topo.vertex_rc
    grid[rc[:, 0] - topo.row_min, rc[:, 1] - topo.col_min] = config.labels()
    return grid


def base_points(lattice: RectLattice, margin: int, period: int = 1,
                rows: tuple[int, int] | None = None) -> np.ndarray:
    """Primal vertices at least ``margin`` diamond steps from the sides, on rows ≡ 0 mod period."""
    rc = lattice.topo.vertex_rc
    r, c = rc[:, 0], rc[:, 1]
    ok = (c >= lattice.col_min + margin) & (c <= lattice.col_max - margin)
    if rows is None:
        ok &= (r >= lattice.row_min + margin) & (r <= lattice.row_max - margin)
    else:
        ok &= (r >= rows[0]) & (r <= rows[1])
    ok &= (r - lattice.row_min) % period == 0 if period > 1 else True
    return np.flatnonzero(ok)


def two_point_fraction(config: Configuration, base: np.ndarray, disp: tuple[int, int]) -> tuple[int, int]:
    """(hits, trials) of ``x <-> x + disp`` over base points whose translate is in the window."""
    topo = config.lattice.topo
    grid = label_grid(config)
    rc = topo.vertex_rc[base]
    r2 = rc[:, 0] + disp[0] - topo.row_min
    c2 = rc[:, 1] + disp[1] - topo.col_min
    ok = (r2 >= 0) & (r2 <= topo.n_tracks) & (c2 >= 0) & (c2 <= topo.n_columns)
    lab = config.labels()
    other = grid[r2[ok], c2[ok]]
    return int((other == lab[base[ok]]).sum()), int(ok.sum())


# -- decay estimates ----------------------------------------------------------------
POINT, HYPERPLANE, HALF_PLANE = "xi", "zeta", "zeta_hp"


@dataclass
class DecayEstimate:
    """Weighted least-squares fit of ``-log P(n)`` against ``n``; ``rate = 1 / slope``."""

    theta: float
    kind: str
    slope: float
    intercept: float
    slope_se: float
    n_grid: tuple[float, ...]
    p_hat: tuple[float, ...]
    p_se: tuple[float, ...]
    samples: tuple[int, ...]
    dropped: tuple[float, ...] = ()
    flags: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return 1.0 / self.slope if self.slope > 0 else math.inf

    @property
    def rate_se(self) -> float:
        return self.slope_se / self.slope ** 2 if self.slope > 0 else math.inf

    @property
    def inverse_rate(self) -> float:
        return self.slope

    def csv_rows(self) -> list[dict]:
        return [{"kind": self.kind, "theta": self.theta, "n": n, "p_hat": p, "p_se": s,
                 "samples": k, "slope": self.slope, "slope_se": self.slope_se,
                 "rate": self.rate, "rate_se": self.rate_se}
                for n, p, s, k in zip(self.n_grid, self.p_hat, self.p_se, self.samples)]


DECAY_COLUMNS = ["kind", "theta", "n", "p_hat", "p_se", "samples", "slope", "slope_se", "rate",
                 "rate_se"]


def fit_decay(n_grid, p_hat, p_se=None, theta: float = 0.0, kind: str = POINT,
              samples=None, ornstein_zernike: bool = False) -> DecayEstimate:
    """Fit ``-log P(n) = slope * n + intercept`` by weighted least squares.

    Points with ``P = 0`` are dropped with a warning.  With ``ornstein_zernike``
    the point-to-point prefactor ``n^{-1/2}`` is removed before fitting.
    """
    n = np.asarray(n_grid, float)
    p = np.asarray(p_hat, float)
    se = np.zeros_like(p) if p_se is None else np.asarray(p_se, float)
    samples = tuple(int(s) for s in samples) if samples is not None else (0,) * len(n)
    keep = p > 0
    dropped = tuple(float(x) for x in n[~keep])
    if dropped:
        warnings.warn(f"dropping n={dropped}: no connections observed", RuntimeWarning)
    nk, pk, sk = n[keep], p[keep], se[keep]
    if len(nk) < 2:
        raise ValueError("need at least two n with positive estimates")
    y = -np.log(pk)
    if ornstein_zernike:
        y -= 0.5 * np.log(nk)
    sig = np.where(sk > 0, sk / pk, 0.0)
    if (sig > 0).all():
        w = 1.0 / sig ** 2
    else:
        w = np.ones_like(y)
    X = np.stack([nk, np.ones_like(nk)], axis=1)
    WX = X * w[:, None]
    cov = np.linalg.inv(X.T @ WX)
    slope, intercept = cov @ (WX.T @ y)
    if (sig > 0).all():
        slope_se = math.sqrt(cov[0, 0])
    else:
        resid = y - X @ np.array([slope, intercept])
        dof = max(len(nk) - 2, 1)
        slope_se = math.sqrt(cov[0, 0] * float(resid @ resid) / dof)
    flags = {}
    if slope <= 0:
        flags["out_of_regime"] = True
    return DecayEstimate(float(theta), kind, float(slope), float(intercept), float(slope_se),
                         tuple(float(x) for x in n), tuple(float(x) for x in p),
                         tuple(float(x) for x in se), samples, dropped, flags)


@dataclass
class ProfileRun:
    """Knobs for Monte Carlo connection profiles."""

    width: int = 48
    height: int = 48
    burn_in: int | None = None
    measurements: int = 100
    spacing: int = 2
    margin: int = 2
    bc: str = "free"


def _measure(angles: AngleSequence, q: float, run: ProfileRun, seed: int, replicas: int,
             geometry: str, observe) -> list:
    """Run ``replicas`` chains and call ``observe(config)`` after each spacing."""
    out = []
    for rep in range(replicas):
        lat = build_lattice(angles, run.width, run.height, geometry)
        bc = None
        if run.bc == "wired":
            bc = BoundaryCondition.wired(lat.topo.boundary_vertices)
        elif run.bc != "free":
            raise ValueError(f"unknown boundary condition {run.bc!r}")
        chain = new_chain(lat, WeightTable.for_lattice(lat, q), bc, seed=seed, stream=rep)
        run_chain(chain, run.burn_in)
        for _ in range(run.measurements):
            for _ in range(run.spacing):
                heat_bath_sweep(chain)
            out.append(observe(chain.config))
    return out


def connection_profile(kind: str, theta: float, q: float, angles: AngleSequence, n_grid,
                       replicas: int = 1, seed: int = 0, run: ProfileRun | None = None):
    """Translation-averaged connection probabilities at the distances ``n_grid``.

    Returns ``(distances, p_hat, p_se, trials)``.  For point-to-point
    connections the distance is the length of the lattice displacement actually
    used, otherwise the requested ``n``.  Standard errors come from the spread
    of replica means, or of single measurements when there is one replica.
    """
    run = run or ProfileRun()
    n_grid = [float(n) for n in n_grid]
    period = angles.period or 1
    geometry = STRIP if kind == HALF_PLANE else "window"
    template = build_lattice(angles, run.width, run.height, geometry)

    if kind == POINT:
        base = base_points(template, run.margin, period)
        disps = [nearest_displacement(template, theta, n) for n in n_grid]
        o = origin_vertex(template)
        distances = []
        for d in disps:
            w = template.topo.vertex_id(d[0], d[1])
            distances.append(float(np.hypot(*(template.positions[w] - template.positions[o]))))

        def observe(cfg):
            res = [two_point_fraction(cfg, base, d) for d in disps]
            return [h / t if t else np.nan for h, t in res], [t for _, t in res]
    elif kind in (HYPERPLANE, HALF_PLANE):
        if kind == HALF_PLANE:
            base = base_points(template, run.margin, period, rows=(0, 0))
        else:
            base = base_points(template, run.margin, period)
        proj_all = projections(template, theta)
        room = proj_all.max() - proj_all[base]
        usable = [base[room >= n] for n in n_grid]
        distances = list(n_grid)

        def observe(cfg):
            reach = cluster_max_projection(cfg, theta) - proj_all
            vals = [float((reach[b] >= n - TIE_TOL).mean()) if len(b) else np.nan
                    for b, n in zip(usable, n_grid)]
            return vals, [len(b) for b in usable]
    else:
        raise ValueError(f"unknown decay kind {kind!r}")

    obs = _measure(angles, q, run, seed, replicas, geometry, observe)
    vals = np.array([o[0] for o in obs], float)
    trials = np.array([o[1] for o in obs]).sum(axis=0)
    p_hat = np.nanmean(vals, axis=0)
    if replicas > 1:
        # measurements within a chain are correlated; independent replicas are not
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = np.nanmean(vals.reshape(replicas, -1, vals.shape[1]), axis=1)
        m = np.sum(~np.isnan(rep), axis=0)
        p_se = np.nanstd(rep, axis=0, ddof=1) / np.sqrt(np.maximum(m, 1))
    else:
        m = np.sum(~np.isnan(vals), axis=0)
        p_se = np.nanstd(vals, axis=0, ddof=1) / np.sqrt(np.maximum(m, 1))
    return distances, p_hat, p_se, trials


def estimate_decay(kind: str, theta: float, q: float, angles: AngleSequence, n_grid,
                   replicas: int = 1, seed: int = 0, run: ProfileRun | None = None,
                   ornstein_zernike: bool = False) -> DecayEstimate:
    """Monte Carlo decay rate in direction ``theta`` (free boundary conditions)."""
    if q <= 4:
        warnings.warn("decay rates are only finite for q > 4", RuntimeWarning)
    if kind == HALF_PLANE and abs(math.remainder(theta - 1.5 * math.pi, 2 * math.pi)) < 1e-12:
        raise ValueError("the half-plane rate is undefined in direction 3pi/2")
    dist, p_hat, p_se, trials = connection_profile(kind, theta, q, angles, n_grid, replicas, seed,
                                                   run)
    return fit_decay(dist, p_hat, p_se, theta, kind, trials, ornstein_zernike)


# -- convex duality and Wulff shapes --------------------------------------------------
def convex_dual(theta_grid, zeta_inv) -> np.ndarray:
    """``xi_inv(theta) = max_theta' zeta_inv(theta') <e_theta, e_theta'>`` over the grid."""
    th = np.asarray(theta_grid, float)
    z = np.asarray(zeta_inv, float)
    return (z[None, :] * np.cos(th[:, None] - th[None, :])).max(axis=1)


def _clip(poly: list[tuple[float, float]], nx: float, ny: float, h: float):
    """Keep the part of a convex polygon with ``nx*x + ny*y <= h``."""
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = nx * p[0] + ny * p[1] - h
        fq = nx * q[0] + ny * q[1] - h
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _ray_distance(poly: np.ndarray, phi: float) -> float:
    """Distance from the origin to the boundary of a convex polygon along ``e_phi``."""
    d = np.array([math.cos(phi), math.sin(phi)])
    best = math.inf
    n = len(poly)
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        e = b - a
        den = d[0] * (-e[1]) - d[1] * (-e[0])
        if abs(den) < 1e-15:
            continue
        t = (a[0] * (-e[1]) - a[1] * (-e[0])) / den
        s = (d[0] * a[1] - d[1] * a[0]) / den
        if t > 0 and -1e-12 <= s <= 1 + 1e-12:
            best = min(best, t)
    return best


@dataclass
class WulffPolygon:
    """Intersection of the half-planes ``<x, e_theta> <= xi_inv(theta)``."""

    theta: np.ndarray
    radii: np.ndarray
    vertices: np.ndarray
    normalized: np.ndarray

    @property
    def area(self) -> float:
        return _area(self.vertices)

    def radial(self, polygon: np.ndarray | None = None) -> np.ndarray:
        poly = self.normalized if polygon is None else polygon
        return np.array([_ray_distance(poly, t) for t in self.theta])

    def roundness(self) -> float:
        """max/min distance from the origin to the boundary along the grid directions."""
        r = self.radial()
        return float(r.max() / r.min())

    def constraint_violation(self) -> float:
        proj = self.vertices @ np.stack([np.cos(self.theta), np.sin(self.theta)])
        return float((proj - self.radii[None, :]).max())

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "x", "y", "x_normalized", "y_normalized"])
        for k, (p, r) in enumerate(zip(self.vertices, self.normalized)):
            w.writerow([k, repr(float(p[0])), repr(float(p[1])), repr(float(r[0])),
                        repr(float(r[1]))])
        return buf.getvalue()

    def svg(self, size: int = 400) -> str:
        poly = self.normalized
        ext = float(np.abs(poly).max()) * 1.1
        scale = size / (2 * ext)
        pts = " ".join(f"{size / 2 + x * scale:.4f},{size / 2 - y * scale:.4f}" for x, y in poly)
        r = scale / math.sqrt(math.pi)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
                f'viewBox="0 0 {size} {size}">\n'
                f'<circle cx="{size / 2}" cy="{size / 2}" r="{r:.4f}" fill="none" '
                f'stroke="#999" stroke-dasharray="4 3"/>\n'
                f'<polygon points="{pts}" fill="none" stroke="#000"/>\n'
                f'<circle cx="{size / 2}" cy="{size / 2}" r="2"/>\n</svg>\n')


def wulff_shape(theta_grid, xi_inv) -> WulffPolygon:
    """Wulff polygon of the inverse correlation lengths, plus a unit-area copy."""
    th = np.asarray(theta_grid, float)
    r = np.asarray(xi_inv, float)
    if (r <= 0).any():
        raise ValueError("inverse correlation lengths must be positive")
    big = 4.0 * float(r.max()) / max(math.cos(math.pi / 4), 1e-3) + 1.0
    poly = [(-big, -big), (big, -big), (big, big), (-big, big)]
    for t, h in zip(th, r):
        poly = _clip(poly, math.cos(t), math.sin(t), float(h))
    verts = np.array(poly)
    # drop near-duplicate vertices produced by redundant constraints
    keep = np.ones(len(verts), dtype=bool)
    for k in range(len(verts)):
        if np.linalg.norm(verts[k] - verts[(k + 1) % len(verts)]) < 1e-12:
            keep[k] = False
    verts = verts[keep]
    area = _area(verts)
    return WulffPolygon(th, r, verts, verts / math.sqrt(area))


def symmetric_grid(values: dict[float, float], symmetry: str = "square") -> tuple[np.ndarray, np.ndarray]:
    """Extend measurements on ``[0, pi/4]`` to the full circle by the dihedral symmetry
    of the square lattice (``'square'``) or by ``theta -> theta + pi`` only (``'point'``)."""
    pts: dict[float, float] = {}
    for t, v in values.items():
        if symmetry == "square":
            images = [t, math.pi / 2 - t]
            images = [s + k * math.pi / 2 for s in images for k in range(4)]
        elif symmetry == "point":
            images = [t, t + math.pi]
        else:
            raise ValueError(f"unknown symmetry {symmetry!r}")
        for s in images:
            pts[round(s % (2 * math.pi), 12)] = v
    th = np.array(sorted(pts))
    return th, np.array([pts[t] for t in th])


# -- aiming -------------------------------------------------------------------------
UPPER, LOWER, AMBIGUOUS = "upper", "lower", "ambiguous"


def classify_aiming(points: np.ndarray, p_hat: np.ndarray, p_se: np.ndarray) -> str:
    """Sign of the vertical coordinate of the most likely shell point.

    Ambiguous when the best point on the other side is within one combined
    standard error, or when the best point lies on the axis.
    """
    points = np.asarray(points, float)
    p_hat = np.asarray(p_hat, float)
    p_se = np.asarray(p_se, float)
    k = int(np.argmax(p_hat))
    y = points[k, 1]
    if abs(y) < 1e-9:
        return AMBIGUOUS
    other = points[:, 1] < -1e-9 if y > 0 else points[:, 1] > 1e-9
    if other.any():
        j = np.flatnonzero(other)[np.argmax(p_hat[other])]
        if p_hat[k] - p_hat[j] <= math.hypot(p_se[k], p_se[j]):
            return AMBIGUOUS
    return UPPER if y > 0 else LOWER


def shell_displacements(lattice: RectLattice, theta: float, n: float, depth: float = 1.0,
                        halfwidth: float | None = None):
    """Label offsets and planar offsets of the vertices with ``n <= <x, e_theta> < n + depth``."""
    o = origin_vertex(lattice)
    pos = lattice.positions - lattice.positions[o]
    e = e_theta(theta)
    proj = pos @ e
    lateral = pos @ np.array([-e[1], e[0]])
    sel = (proj >= n - TIE_TOL) & (proj < n + depth - TIE_TOL)
    if halfwidth is not None:
        sel &= np.abs(lateral) <= halfwidth
    idx = np.flatnonzero(sel)
    rc = lattice.topo.vertex_rc[idx] - lattice.topo.vertex_rc[o]
    return [tuple(int(x) for x in d) for d in rc], pos[idx]


def aiming_diagnostic(angles: AngleSequence, q: float, theta: float, n: float, replicas: int = 1,
                      seed: int = 0, run: ProfileRun | None = None,
                      halfwidth: float | None = None) -> tuple[str, dict]:
    """Finite-n aiming heuristic: is ``P[0 <-> x]`` over the shell at distance ``n``
    maximised above or below the axis?"""
    run = run or ProfileRun()
    template = build_lattice(angles, run.width, run.height)
    disps, pts = shell_displacements(template, theta, n, halfwidth=halfwidth or n)
    base = base_points(template, run.margin, angles.period or 1)

    def observe(cfg):
        res = [two_point_fraction(cfg, base, d) for d in disps]
        return [h / t if t else np.nan for h, t in res]

    vals = np.array(_measure(angles, q, run, seed, replicas, "window", observe), float)
    p_hat = np.nanmean(vals, axis=0)
    p_se = np.nanstd(vals, axis=0, ddof=1) / math.sqrt(len(vals))
    label = classify_aiming(pts, p_hat, p_se)
    return label, {"points": pts, "p_hat": p_hat, "p_se": p_se}


__all__ = [
    "AMBIGUOUS", "DECAY_COLUMNS", "DecayEstimate", "DirectionalExtremum", "HALF_PLANE",
    "HYPERPLANE", "LOWER", "POINT", "ProfileRun", "UPPER", "WulffPolygon", "aiming_diagnostic",
    "base_points", "classify_aiming", "cluster_extrema", "cluster_max_projection", "cluster_of",
    "clusters", "connection_profile", "convex_dual", "e_theta", "estimate_decay", "extremum",
    "extremum_of", "fit_decay", "hyperplane_connected", "hyperplane_truncated", "label_grid",
    "nearest_displacement", "origin_vertex", "projections", "shell_displacements",
    "symmetric_grid", "touches_edge", "touches_lateral_edge", "two_point_fraction", "wulff_shape",
]
