"""Isoradial rectangular lattice patches.

The diamond graph is indexed by integer points ``(row, col)``.  Horizontal
track ``t_k`` is the row of rhombi between diamond rows ``k - 1`` and ``k``;
vertical track ``s_j`` is the column of rhombi between diamond columns
``j - 1`` and ``j``.  A diamond vertex is primal when ``(row + col) % 2`` equals
the lattice parity (0 for the primal lattice, 1 for its dual), so the origin
``(0, 0)`` sits between ``t_0``/``t_1`` and ``s_0``/``s_1`` and is primal.

Every rhombus carries exactly one primal edge.  When the rhombus's lower-left
corner is primal the edge is the long diagonal ``(k-1, j-1)-(k, j)`` with
rhombus angle ``pi - alpha_k``; otherwise it is the short diagonal
``(k-1, j)-(k, j-1)`` with angle ``alpha_k``.  The combinatorics never depends
on the angles, so patches built from different angle sequences share one
:class:`Topology`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

STRIP = "strip"
WINDOW = "window"


@dataclass(frozen=True)
class AngleSequence:
    """Transverse angles of the horizontal tracks, 1-based and bottom-up.

    With ``period`` set, ``angle(i)`` is defined for every integer ``i`` by
    periodic extension; otherwise only ``1 <= i <= len(values)`` is valid.
    """

    values: tuple[float, ...]
    period: int | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("angle sequence is empty")
        for v in vals:
            if not 0.0 < v < math.pi:
                raise ValueError(f"transverse angle {v} outside (0, pi)")
        if len(set(vals)) > 2:
            raise ValueError("at most two distinct transverse angles are supported")
        if self.period is not None:
            if self.period < 1 or len(vals) != self.period:
                raise ValueError("periodic sequences list exactly one period of values")

    @classmethod
    def constant(cls, alpha: float) -> "AngleSequence":
        return cls((alpha,), period=1)

    @classmethod
    def alternating(cls, alpha: float, beta: float) -> "AngleSequence":
        """Odd tracks get ``alpha``, even tracks ``beta``."""
        return cls((alpha, beta), period=2)

    @classmethod
    def blocks(cls, alpha: float, beta: float, n: int) -> "AngleSequence":
        """``n`` tracks of ``alpha`` then ``n`` of ``beta``, repeated."""
        if n < 1:
            raise ValueError("block size must be positive")
        return cls((alpha,) * n + (beta,) * n, period=2 * n)

    def angle(self, i: int) -> float:
        if self.period is not None:
            return self.values[(i - 1) % self.period]
        if not 1 <= i <= len(self.values):
            raise IndexError(f"track {i} outside the finite sequence 1..{len(self.values)}")
        return self.values[i - 1]

    def window(self, first: int, last: int) -> tuple[float, ...]:
        return tuple(self.angle(i) for i in range(first, last + 1))


@dataclass(frozen=True)
class Cell:
    """2x2 block of diamond vertices anchored at its lower-left primal vertex."""

    index: tuple[int, int]
    anchor: tuple[int, int]
    extent: tuple[tuple[int, int], ...]


class Topology:
    """Combinatorial part of a patch: vertices, edges, adjacency, boundary.

    Diamond rows run over ``row_min..row_max`` and columns over
    ``col_min..col_max``.  Edge ids are ``(k - row_min - 1) * ncols_rhombi + (j - col_min - 1)``
    for the rhombus of tracks ``(t_k, s_j)``.
    """

    def __init__(self, row_min: int, row_max: int, col_min: int, col_max: int, parity: int = 0):
        if row_max <= row_min or col_max <= col_min:
            raise ValueError("a patch needs at least one rhombus")
        self.row_min, self.row_max = row_min, row_max
        self.col_min, self.col_max = col_min, col_max
        self.parity = parity % 2
        self.n_tracks = row_max - row_min
        self.n_columns = col_max - col_min

        rows = np.arange(row_min, row_max + 1)
        cols = np.arange(col_min, col_max + 1)
        rr, cc = np.meshgrid(rows, cols, indexing="ij")
        primal = (rr + cc) % 2 == self.parity
        self.vertex_rc = np.stack([rr[primal], cc[primal]], axis=1)
        self.n_vertices = len(self.vertex_rc)
        index = np.full(rr.shape, -1, dtype=np.int64)
        index[primal] = np.arange(self.n_vertices)
        self._index = index

        k = np.arange(row_min + 1, row_max + 1)
        j = np.arange(col_min + 1, col_max + 1)
        kk, jj = np.meshgrid(k, j, indexing="ij")
        kk, jj = kk.ravel(), jj.ravel()
        self.edge_track = kk
        self.edge_column = jj
        self.edge_long = (kk - 1 + jj - 1) % 2 == self.parity
        r_u = np.where(self.edge_long, kk - 1, kk - 1)
        c_u = np.where(self.edge_long, jj - 1, jj)
        r_v = kk
        c_v = np.where(self.edge_long, jj, jj - 1)
        self.edge_u = index[r_u - row_min, c_u - col_min]
        self.edge_v = index[r_v - row_min, c_v - col_min]
        self.n_edges = len(kk)
        for arr in (self.vertex_rc, self.edge_track, self.edge_column, self.edge_long,
                    self.edge_u, self.edge_v):
            arr.setflags(write=False)

    def vertex_id(self, row: int, col: int) -> int:
        if not (self.row_min <= row <= self.row_max and self.col_min <= col <= self.col_max):
            raise KeyError(f"point ({row}, {col}) outside the patch")
        vid = int(self._index[row - self.row_min, col - self.col_min])
        if vid < 0:
            raise KeyError(f"point ({row}, {col}) is not a primal vertex")
        return vid

    def has_vertex(self, row: int, col: int) -> bool:
        return (self.row_min <= row <= self.row_max and self.col_min <= col <= self.col_max
                and (row + col) % 2 == self.parity)

    def edge_id(self, track: int, column: int) -> int:
        if not (self.row_min < track <= self.row_max and self.col_min < column <= self.col_max):
            raise KeyError(f"rhombus (t_{track}, s_{column}) outside the patch")
        return (track - self.row_min - 1) * self.n_columns + (column - self.col_min - 1)

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR arrays (indptr, neighbour, edge id)."""
        return csr_adjacency(self.n_vertices, self.edge_u, self.edge_v)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        rc = self.vertex_rc
        on = ((rc[:, 0] == self.row_min) | (rc[:, 0] == self.row_max)
              | (rc[:, 1] == self.col_min) | (rc[:, 1] == self.col_max))
        return np.flatnonzero(on)

    def side_vertices(self, side: str) -> np.ndarray:
        rc = self.vertex_rc
        sel = {
            "bottom": rc[:, 0] == self.row_min,
            "top": rc[:, 0] == self.row_max,
            "left": rc[:, 1] == self.col_min,
            "right": rc[:, 1] == self.col_max,
        }[side]
        return np.flatnonzero(sel)

    def __eq__(self, other):
        return (isinstance(other, Topology)
                and (self.row_min, self.row_max, self.col_min, self.col_max, self.parity)
                == (other.row_min, other.row_max, other.col_min, other.col_max, other.parity))

    def __hash__(self):
        return hash((self.row_min, self.row_max, self.col_min, self.col_max, self.parity))


def csr_adjacency(n_vertices: int, eu: np.ndarray, ev: np.ndarray):
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    m = len(eu)
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    eid = np.concatenate([np.arange(m), np.arange(m)])
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n_vertices)
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)


_TOPOLOGIES: dict[tuple, Topology] = {}


def topology(row_min: int, row_max: int, col_min: int, col_max: int, parity: int = 0) -> Topology:
    key = (row_min, row_max, col_min, col_max, parity % 2)
    topo = _TOPOLOGIES.get(key)
    if topo is None:
        topo = _TOPOLOGIES[key] = Topology(*key)
    return topo


@dataclass(frozen=True, eq=False)
class RectLattice:
    """A patch of an isoradial rectangular lattice.

    ``track_angles[k - row_min - 1]`` is the transverse angle of ``t_k``.
    ``base`` is the planar position of diamond point ``(row_min, 0)``; it is
    fixed at construction so that track exchanges move rows without moving
    the bottom of the patch.
    """

    topo: Topology
    track_angles: tuple[float, ...]
    geometry: str = WINDOW
    base: complex = 0j
    sequence: AngleSequence | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.track_angles) != self.topo.n_tracks:
            raise ValueError("one transverse angle per horizontal track is required")
        if len(set(self.track_angles)) > 2:
            raise ValueError("at most two distinct transverse angles are supported")
        for a in self.track_angles:
            if not 0.0 < a < math.pi:
                raise ValueError(f"transverse angle {a} outside (0, pi)")
        if self.geometry not in (STRIP, WINDOW):
            raise ValueError(f"unknown geometry {self.geometry!r}")

    # -- basic shape ---------------------------------------------------------
    @property
    def parity(self) -> int:
        return self.topo.parity

    @property
    def row_min(self) -> int:
        return self.topo.row_min

    @property
    def row_max(self) -> int:
        return self.topo.row_max

    @property
    def col_min(self) -> int:
        return self.topo.col_min

    @property
    def col_max(self) -> int:
        return self.topo.col_max

    @property
    def n_edges(self) -> int:
        return self.topo.n_edges

    @property
    def n_vertices(self) -> int:
        return self.topo.n_vertices

    @property
    def tracks(self) -> range:
        """Indices of the horizontal tracks present in the patch."""
        return range(self.row_min + 1, self.row_max + 1)

    def track_angle(self, k: int) -> float:
        if k not in self.tracks:
            raise IndexError(f"track t_{k} not in the patch")
        return self.track_angles[k - self.row_min - 1]

    def with_angles(self, angles) -> "RectLattice":
        return RectLattice(self.topo, tuple(float(a) for a in angles), self.geometry, self.base,
                           self.sequence)

    def swapped(self, i: int) -> "RectLattice":
        """The patch with tracks t_{i-1} and t_i exchanged."""
        if i - 1 not in self.tracks or i not in self.tracks:
            raise IndexError(f"tracks t_{i - 1}, t_{i} not both in the patch")
        a = list(self.track_angles)
        lo = i - 1 - self.row_min - 1
        a[lo], a[lo + 1] = a[lo + 1], a[lo]
        return self.with_angles(a)

    # -- geometry -------------------------------------------------------------
    @cached_property
    def row_offsets(self) -> np.ndarray:
        """Planar position of diamond point (row, 0) for every row, complex."""
        steps = np.exp(1j * np.asarray(self.track_angles))
        out = np.empty(self.topo.n_tracks + 1, dtype=complex)
        out[0] = self.base
        np.cumsum(steps, out=out[1:])
        out[1:] += self.base
        out.setflags(write=False)
        return out

    def point_position(self, row: int, col: int) -> complex:
        return col + self.row_offsets[row - self.row_min]

    @cached_property
    def positions(self) -> np.ndarray:
        """(n_vertices, 2) planar coordinates of the primal vertices."""
        rc = self.topo.vertex_rc
        z = rc[:, 1] + self.row_offsets[rc[:, 0] - self.row_min]
        out = np.stack([z.real, z.imag], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def edge_angles(self) -> np.ndarray:
        """Rhombus angle theta_e of every primal edge."""
        alpha = np.asarray(self.track_angles)[self.topo.edge_track - self.row_min - 1]
        out = np.where(self.topo.edge_long, math.pi - alpha, alpha)
        out.setflags(write=False)
        return out

    def edge_angle(self, edge: int) -> float:
        if not 0 <= edge < self.n_edges:
            raise KeyError(f"unknown edge id {edge}")
        return float(self.edge_angles[edge])

    def edge_lengths(self) -> np.ndarray:
        pos = self.positions
        d = pos[self.topo.edge_u] - pos[self.topo.edge_v]
        return np.hypot(d[:, 0], d[:, 1])

    def rhombus_corners(self, edge: int) -> list[complex]:
        k = int(self.topo.edge_track[edge])
        j = int(self.topo.edge_column[edge])
        return [self.point_position(k - 1, j - 1), self.point_position(k - 1, j),
                self.point_position(k, j), self.point_position(k, j - 1)]

    # -- cells ----------------------------------------------------------------
    def cell_index(self, row: int, col: int) -> tuple[int, int]:
        return ((col - self.parity) // 2, row // 2)

    def cell_anchor(self, index: tuple[int, int]) -> tuple[int, int]:
        i, j = index
        return (2 * j, 2 * i + self.parity)

    def cell_of(self, row: int, col: int) -> Cell:
        if not (self.row_min <= row <= self.row_max and self.col_min <= col <= self.col_max):
            raise KeyError(f"point ({row}, {col}) outside the patch")
        idx = self.cell_index(row, col)
        ar, ac = self.cell_anchor(idx)
        extent = ((ar, ac), (ar, ac + 1), (ar + 1, ac), (ar + 1, ac + 1))
        return Cell(index=idx, anchor=(ar, ac), extent=extent)

    @cached_property
    def vertex_anchor(self) -> np.ndarray:
        """Diamond coordinates of the cell anchor of every primal vertex."""
        rc = self.topo.vertex_rc
        ar = 2 * (rc[:, 0] // 2)
        ac = 2 * ((rc[:, 1] - self.parity) // 2) + self.parity
        out = np.stack([ar, ac], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def anchor_positions(self) -> np.ndarray:
        """Planar position of the anchor of the cell of every primal vertex.

        Anchors may fall one row or column outside the patch; their position
        is still defined by extending the first/last track angle.
        """
        rc = self.vertex_anchor
        rows = rc[:, 0]
        offs = _extended_row_offsets(self, rows)
        z = rc[:, 1] + offs
        out = np.stack([z.real, z.imag], axis=1)
        out.setflags(write=False)
        return out

    # -- duality --------------------------------------------------------------
    def dual(self) -> "RectLattice":
        """Same rhombic patch with primal and dual roles exchanged (built once per lattice)."""
        d = self.__dict__.get("_dual")
        if d is None:
            t = self.topo
            d = RectLattice(topology(t.row_min, t.row_max, t.col_min, t.col_max, 1 - t.parity),
                            self.track_angles, self.geometry, self.base, self.sequence)
            self.__dict__["_dual"] = d
        return d

    # -- misc -----------------------------------------------------------------
    def nearest_vertex(self, x: float, y: float) -> int:
        """Primal vertex closest to (x, y); ties go to the smallest (x, y)."""
        pos = self.positions
        d2 = (pos[:, 0] - x) ** 2 + (pos[:, 1] - y) ** 2
        best = d2.min()
        cand = np.flatnonzero(d2 <= best + 1e-12)
        if len(cand) > 1:
            order = np.lexsort((pos[cand, 1], pos[cand, 0]))
            return int(cand[order[0]])
        return int(cand[0])

    def same_structure(self, other: "RectLattice") -> bool:
        return (self.topo == other.topo and self.geometry == other.geometry
                and np.allclose(self.track_angles, other.track_angles, rtol=0, atol=0)
                and self.base == other.base)

    def spec(self) -> "LatticeSpec":
        seq = self.sequence or AngleSequence(self.track_angles)
        return LatticeSpec(seq.values, seq.period, self.topo.n_columns, self.topo.n_tracks,
                           self.geometry)


def _extended_row_offsets(lat: RectLattice, rows: np.ndarray) -> np.ndarray:
    offs = lat.row_offsets
    idx = rows - lat.row_min
    inside = (idx >= 0) & (idx < len(offs))
    out = np.empty(len(rows), dtype=complex)
    out[inside] = offs[idx[inside]]
    below = idx < 0
    if below.any():
        step = np.exp(1j * lat.track_angles[0])
        out[below] = offs[0] + idx[below] * step
    above = idx >= len(offs)
    if above.any():
        step = np.exp(1j * lat.track_angles[-1])
        out[above] = offs[-1] + (idx[above] - len(offs) + 1) * step
    return out


def build_lattice(angles: AngleSequence, width: int, height: int, geometry: str = WINDOW,
                  col_min: int | None = None) -> RectLattice:
    """Build a patch with ``width`` vertical and ``height`` horizontal tracks.

    A strip has tracks ``t_1..t_height`` above the horizontal axis (diamond row
    0).  A window is centred on the origin vertically.  Columns are centred on
    the origin unless ``col_min`` is given.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be at least 1")
    if geometry == STRIP:
        row_min = 0
    elif geometry == WINDOW:
        row_min = -(height // 2)
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    row_max = row_min + height
    if col_min is None:
        col_min = -(width // 2)
    col_max = col_min + width
    track_angles = angles.window(row_min + 1, row_max)
    # place the origin (row 0, col 0) at planar 0
    if row_min <= 0:
        base = -complex(np.exp(1j * np.asarray(track_angles[: -row_min])).sum()) if row_min < 0 else 0j
    else:
        base = complex(np.exp(1j * np.asarray(angles.window(1, row_min))).sum())
    return RectLattice(topology(row_min, row_max, col_min, col_max, 0), track_angles, geometry,
                       base, angles)


def dual_lattice(lattice: RectLattice) -> RectLattice:
    return lattice.dual()


def edge_angle(lattice: RectLattice, edge: int) -> float:
    return lattice.edge_angle(edge)


def cell_of(lattice: RectLattice, row: int, col: int) -> Cell:
    return lattice.cell_of(row, col)


@dataclass(frozen=True)
class LatticeSpec:
    """Plain-text serialisable recipe for :func:`build_lattice`."""

    angles: tuple[float, ...]
    period: int | None
    width: int
    height: int
    geometry: str

    def build(self) -> RectLattice:
        return build_lattice(AngleSequence(self.angles, self.period), self.width, self.height,
                             self.geometry)

    def to_text(self) -> str:
        return "\n".join([
            "angles=" + ",".join(repr(a) for a in self.angles),
            "period=" + ("" if self.period is None else str(self.period)),
            f"width={self.width}",
            f"height={self.height}",
            f"geometry={self.geometry}",
        ]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LatticeSpec":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        missing = {"angles", "period", "width", "height", "geometry"} - fields.keys()
        if missing:
            raise ValueError(f"lattice record lacks {sorted(missing)}")
        return cls(
            angles=tuple(float(a) for a in fields["angles"].split(",")),
            period=int(fields["period"]) if fields["period"] else None,
            width=int(fields["width"]),
            height=int(fields["height"]),
            geometry=fields["geometry"],
        )
