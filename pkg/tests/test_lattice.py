import math

import numpy as np
import pytest

from isofk.lattice import (STRIP, WINDOW, AngleSequence, LatticeSpec, build_lattice, cell_of,
                           edge_angle)

PI = math.pi


def test_square_lattice_is_rotated_scaled_z2():
    lat = build_lattice(AngleSequence.constant(PI / 2), 4, 4)
    pos = lat.positions
    # rotate by -pi/4 and divide by sqrt(2): integer points
    rot = pos @ np.array([[1, -1], [1, 1]]) / 2.0
    assert np.allclose(rot, np.round(rot), atol=1e-12)
    d = pos[lat.topo.edge_u] - pos[lat.topo.edge_v]
    assert np.allclose(np.hypot(d[:, 0], d[:, 1]), math.sqrt(2))


def test_edge_lengths_by_orientation():
    alpha = PI / 3
    lat = build_lattice(AngleSequence.constant(alpha), 6, 6)
    lengths = lat.edge_lengths()
    # the edge bisects the rhombus angle pi - theta_e, so its length is 2 sin(theta_e / 2)
    assert np.allclose(lengths, 2 * np.sin(lat.edge_angles / 2))
    assert set(np.round(lengths, 12)) == {round(2 * math.cos(alpha / 2), 12),
                                         round(2 * math.sin(alpha / 2), 12)}


def test_alternating_sequence_places_beta_on_even_tracks():
    a, b = PI / 3, PI / 2
    seq = AngleSequence.alternating(a, b)
    assert [seq.angle(i) for i in range(-2, 5)] == [b, a, b, a, b, a, b]
    lat = build_lattice(seq, 4, 6, STRIP)
    assert lat.track_angles == (a, b, a, b, a, b)


def test_edge_angles_of_constant_lattice():
    alpha = PI / 3
    lat = build_lattice(AngleSequence.constant(alpha), 6, 6)
    long_ = lat.topo.edge_long
    # "horizontal" edges of L(alpha) are the long diagonals, of length 2 cos(alpha / 2)
    assert np.allclose(lat.edge_lengths()[long_], 2 * math.cos(alpha / 2))
    assert np.allclose(lat.edge_angles[long_], PI - alpha)
    assert np.allclose(lat.edge_angles[~long_], alpha)
    sq = build_lattice(AngleSequence.constant(PI / 2), 4, 4)
    assert np.allclose(sq.edge_angles, PI / 2)
    assert edge_angle(sq, 0) == pytest.approx(PI / 2)


def test_dual_pairs_edges_with_complementary_angles():
    lat = build_lattice(AngleSequence.alternating(PI / 3, 2 * PI / 3), 6, 6)
    dual = lat.dual()
    assert np.allclose(dual.edge_angles, PI - lat.edge_angles)
    assert dual.dual().same_structure(lat)
    assert dual.topo.n_vertices + lat.topo.n_vertices == 7 * 7
    # each primal edge and its dual cross at the rhombus centre
    pu, pv = lat.positions[lat.topo.edge_u], lat.positions[lat.topo.edge_v]
    du, dv = dual.positions[dual.topo.edge_u], dual.positions[dual.topo.edge_v]
    assert np.allclose((pu + pv) / 2, (du + dv) / 2)


def test_square_dual_is_unit_translate():
    lat = build_lattice(AngleSequence.constant(PI / 2), 6, 6)
    prim = {tuple(np.round(p, 9)) for p in lat.positions}
    shifted = {tuple(np.round(p + [1.0, 0.0], 9)) for p in lat.dual().positions}
    assert len(prim & shifted) > 0.7 * len(prim)


def test_cells():
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 8, 8)
    c = cell_of(lat, 0, 0)
    assert c.index == (0, 0) and c.anchor == (0, 0)
    # dual points inside cell (0, 0)
    assert cell_of(lat, 0, 1).index == (0, 0)
    assert cell_of(lat, 1, 0).index == (0, 0)
    anchors = {lat.cell_of(r, c).anchor for r in range(0, 8 - 4) for c in range(0, 8 - 4)
               if lat.row_min <= r <= lat.row_max and lat.col_min <= c <= lat.col_max}
    # a 4x4 block of diamond points holds 2x2 cells
    assert len(anchors) == 4
    with pytest.raises(KeyError):
        lat.cell_of(100, 0)


def test_cell_anchors_partition_window():
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 8, 8)
    cells = {}
    for r in range(-2, 2):
        for c in range(-2, 2):
            cells.setdefault(lat.cell_of(r, c).anchor, []).append((r, c))
    assert len(cells) == 4
    assert all(len(v) == 4 for v in cells.values())


def test_sequence_validation():
    with pytest.raises(ValueError):
        AngleSequence((0.0,))
    with pytest.raises(ValueError):
        AngleSequence((0.5, 1.0, 1.5))
    with pytest.raises(IndexError):
        AngleSequence((0.5, 1.0)).angle(3)
    blocks = AngleSequence.blocks(PI / 2, PI / 3, 2)
    assert blocks.window(1, 6) == (PI / 2, PI / 2, PI / 3, PI / 3, PI / 2, PI / 2)


def test_spec_round_trip():
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 6, 4, WINDOW)
    text = lat.spec().to_text()
    again = LatticeSpec.from_text(text).build()
    assert again.same_structure(lat)
