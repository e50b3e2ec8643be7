import math
from collections import deque

import numpy as np
import pytest

from isofk import _pycore
from isofk._backend import COMPILED, core
from isofk.exact import BoundaryCondition, ExactMeasure, state_to_mask, total_variation
from isofk.lattice import STRIP, AngleSequence, build_lattice
from isofk.sampler import (BOTTOM_EVENTS, Configuration, bottom_track_events, half_plane_bc,
                           half_plane_lattice, heat_bath_sweep, integrated_autocorrelation,
                           make_rng, new_chain, run_chain, sample)
from isofk.weights import WeightTable

PI = math.pi


def empirical_law(lattice, q, bc, sweeps, seed=0, burn_in=50):
    weights = WeightTable.for_lattice(lattice, q)
    chain = new_chain(lattice, weights, bc, seed=seed)
    run_chain(chain, burn_in)
    counts = np.zeros(1 << lattice.n_edges)
    for _ in range(sweeps):
        heat_bath_sweep(chain)
        counts[state_to_mask(chain.config.state)] += 1
    return counts / sweeps, ExactMeasure(lattice, weights, q, bc).probabilities


def bfs_labels(n, eu, ev, state):
    adj = [[] for _ in range(n)]
    for a, b, s in zip(eu, ev, state):
        if s:
            adj[a].append(b)
            adj[b].append(a)
    lab = [-1] * n
    k = 0
    for s in range(n):
        if lab[s] < 0:
            lab[s] = k
            dq = deque([s])
            while dq:
                x = dq.popleft()
                for y in adj[x]:
                    if lab[y] < 0:
                        lab[y] = k
                        dq.append(y)
            k += 1
    return np.array(lab)


def test_small_patch_matches_exact_law():
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 2, 2)
    emp, exact = empirical_law(lat, 4.0, None, 100_000, seed=3)
    assert total_variation(emp, exact) < 0.02


def test_one_track_strip_matches_exact_law():
    lat = half_plane_lattice(AngleSequence.constant(PI / 3), 1, 2)
    bc = half_plane_bc(lat, "wired")
    emp, exact = empirical_law(lat, 9.0, bc, 50_000, seed=4)
    assert total_variation(emp, exact) < 0.02


def test_single_edge_stationary_probability():
    lat = build_lattice(AngleSequence.constant(PI / 2), 1, 1)
    q = 9.0
    p = WeightTable.for_lattice(lat, q).per_edge
    assert lat.n_edges == 1
    emp, exact = empirical_law(lat, q, None, 40_000, seed=5)
    expect = p[0] / (p[0] + q * (1 - p[0]))
    assert exact[1] == pytest.approx(expect)
    assert emp[1] == pytest.approx(expect, abs=5 * math.sqrt(expect * (1 - expect) / 40_000))


def test_percolation_mode_uses_raw_weights():
    lat = build_lattice(AngleSequence.constant(PI / 3), 12, 12)
    weights = WeightTable.for_lattice(lat, 1.0)
    chain = new_chain(lat, weights, seed=0)
    u = make_rng(0, 0).random(lat.n_edges)
    heat_bath_sweep(chain)
    assert np.array_equal(chain.config.state, (u < weights.per_edge).astype(np.uint8))


def test_wired_density_exceeds_free():
    lat = build_lattice(AngleSequence.constant(PI / 2), 12, 12)
    weights = WeightTable.for_lattice(lat, 9.0)
    out = {}
    for name, bc in (("free", None), ("wired", BoundaryCondition.wired(lat.topo.boundary_vertices))):
        dens = []
        for k in range(6):
            chain = run_chain(new_chain(lat, weights, bc, seed=11, stream=k), 100)
            dens.append(np.mean([heat_bath_sweep(chain).config.density() for _ in range(100)]))
        out[name] = (np.mean(dens), np.std(dens, ddof=1) / math.sqrt(len(dens)))
    diff = out["wired"][0] - out["free"][0]
    assert diff > 3 * math.hypot(out["wired"][1], out["free"][1])


def test_backends_agree_bit_for_bit():
    lat = build_lattice(AngleSequence.alternating(PI / 3, PI / 2), 10, 10)
    weights = WeightTable.for_lattice(lat, 4.0)
    bc = BoundaryCondition.wired(lat.topo.side_vertices("top"))
    a = new_chain(lat, weights, bc, seed=9)
    b = new_chain(lat, weights, bc, seed=9)
    for _ in range(20):
        heat_bath_sweep(a, backend=core)
        heat_bath_sweep(b, backend=_pycore)
        assert np.array_equal(a.config.full_state, b.config.full_state)
    st = a.config.full_state
    w = a.config.wired
    assert np.array_equal(core.label_clusters(w.n_vertices, w.eu, w.ev, st),
                          _pycore.label_clusters(w.n_vertices, w.eu, w.ev, st))


def test_labels_match_traversal():
    lat = build_lattice(AngleSequence.constant(PI / 2), 4, 4)
    rng = np.random.default_rng(1)
    for _ in range(20):
        state = (rng.random(lat.n_edges) < 0.5).astype(np.uint8)
        cfg = Configuration(lat, state)
        lab = cfg.labels()
        ref = bfs_labels(lat.n_vertices, lat.topo.edge_u, lat.topo.edge_v, state)
        # same partition
        assert len(set(zip(lab, ref))) == len(set(lab)) == len(set(ref))
    assert len(set(Configuration(lat, np.zeros(lat.n_edges)).labels())) == lat.n_vertices
    assert len(set(Configuration(lat, np.ones(lat.n_edges)).labels())) == 1


def test_connected_skips_edge():
    lat = build_lattice(AngleSequence.constant(PI / 2), 1, 1)
    cfg = Configuration(lat, np.ones(1))
    u, v = lat.topo.edge_u[0], lat.topo.edge_v[0]
    assert cfg.connected(u, v)
    assert not cfg.connected(u, v, skip_edge=0)


def test_reproducible_streams():
    lat = build_lattice(AngleSequence.constant(PI / 2), 8, 8)
    c1 = sample(lat, WeightTable.for_lattice(lat, 4.0), sweeps=30, seed=2)
    c2 = sample(lat, WeightTable.for_lattice(lat, 4.0), sweeps=30, seed=2)
    c3 = sample(lat, WeightTable.for_lattice(lat, 4.0), sweeps=30, seed=2, stream=1)
    assert np.array_equal(c1.state, c2.state)
    assert not np.array_equal(c1.state, c3.state)
    assert "tau_density" in c1.diagnostics
    with pytest.raises(ValueError):
        sample(lat, WeightTable.for_lattice(lat, 4.0), q=3.0)


def test_autocorrelation_of_white_noise():
    x = np.random.default_rng(0).normal(size=4000)
    assert integrated_autocorrelation(x) < 1.5
    ar = np.zeros(4000)
    for i in range(1, 4000):
        ar[i] = 0.9 * ar[i - 1] + x[i]
    assert integrated_autocorrelation(ar) > 10


def test_bottom_track_events():
    lat = half_plane_lattice(AngleSequence.constant(PI / 2), 6, 24)
    cols = np.arange(lat.col_min + 6, lat.col_max - 9, 4)
    full = bottom_track_events(Configuration(lat, np.ones(lat.n_edges)), cols)
    empty = bottom_track_events(Configuration(lat, np.zeros(lat.n_edges)), cols)
    assert full.shape == (len(cols), len(BOTTOM_EVENTS))
    assert np.all(full == 1) and np.all(empty == 0)
    # edges above t_4 never matter
    st = np.zeros(lat.n_edges, dtype=np.uint8)
    st[4 * lat.topo.n_columns:] = 1
    assert np.all(bottom_track_events(Configuration(lat, st), cols) == 0)
    with pytest.raises(ValueError):
        bottom_track_events(Configuration(build_lattice(AngleSequence.constant(1.0), 4, 4)), [0])


def test_extension_present():
    # the packaged build ships the compiled core; the fallback is exercised above
    assert COMPILED
