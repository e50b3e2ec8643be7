import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isofk.exact import (BoundaryCondition, ExactMeasure, Graph, cluster_counts, dominates,
                         dump_fixture, exact_pushforward, load_fixture, log_partition_function,
                         partition_function, single_edge_update, sweep_kernel, total_variation)

EDGE = Graph.from_edges(2, [(0, 1)])
TRIANGLE = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
SQUARE = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def brute_components(n, edges, state, wired=()):
    """Components by repeated relabelling, independent of the library's union-find."""
    lab = list(range(n))
    links = [e for e, s in zip(edges, state) if s]
    links += [(wired[0], w) for w in wired[1:]]
    changed = True
    while changed:
        changed = False
        for a, b in links:
            m = min(lab[a], lab[b])
            if lab[a] != m or lab[b] != m:
                lab[a] = lab[b] = m
                changed = True
    return len(set(lab))


def brute_z(n, edges, p, q, wired=()):
    z = 0.0
    for state in itertools.product((0, 1), repeat=len(edges)):
        w = math.prod(pe if s else 1 - pe for pe, s in zip(p, state))
        z += w * q ** brute_components(n, edges, state, wired)
    return z


def test_single_edge():
    p, q = 0.3, 2.5
    assert partition_function(EDGE, [p], q) == pytest.approx(q * q * (1 - p) + q * p)
    wired = BoundaryCondition.wired([0, 1])
    assert partition_function(EDGE, [p], q, wired) == pytest.approx(q)
    m = ExactMeasure(EDGE, [p], q)
    assert m.probability(lambda s: s[0] == 1) == pytest.approx(p / (p + q * (1 - p)))
    mw = ExactMeasure(EDGE, [p], q, wired)
    assert mw.probability(lambda s: s[0] == 1) == pytest.approx(p)


def test_triangle_fixture():
    # frozen from the brute-force sum above: (q^3 + 3 q^2 + 3 q + q) / 8 at q = 2
    assert brute_z(3, [(0, 1), (1, 2), (0, 2)], [0.5] * 3, 2.0) == pytest.approx(3.5)
    assert partition_function(TRIANGLE, [0.5] * 3, 2.0) == pytest.approx(3.5, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.data())
def test_partition_function_matches_brute_force(n, data):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = data.draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=7))
    p = data.draw(st.lists(st.floats(0.05, 0.95), min_size=len(edges), max_size=len(edges)))
    q = data.draw(st.floats(0.2, 10.0))
    wired = tuple(sorted(data.draw(st.sets(st.integers(0, n - 1), max_size=n))))
    g = Graph.from_edges(n, edges)
    bc = BoundaryCondition.wired(wired) if len(wired) > 1 else None
    expect = brute_z(n, edges, p, q, wired if len(wired) > 1 else ())
    assert partition_function(g, p, q, bc) == pytest.approx(expect, rel=1e-12)
    assert log_partition_function(g, p, q, bc) == pytest.approx(math.log(expect), rel=1e-12)


def test_cluster_counts_order():
    k = cluster_counts(TRIANGLE)
    assert list(k) == [3, 2, 2, 1, 2, 1, 1, 1]


def test_fkg_on_four_cycle():
    m = ExactMeasure(SQUARE, [0.4, 0.6, 0.5, 0.7], 3.0)
    for a, b in itertools.combinations(range(4), 2):
        pab = m.probability(lambda s: s[a] and s[b])
        pa = m.probability(lambda s: s[a])
        pb = m.probability(lambda s: s[b])
        assert pab >= pa * pb - 1e-15


def test_wired_dominates_free():
    p = [0.5] * 4
    free = ExactMeasure(SQUARE, p, 2.0).probabilities
    wired = ExactMeasure(SQUARE, p, 2.0, BoundaryCondition.wired([0, 2])).probabilities
    assert dominates(wired, free, 4)
    assert not dominates(free, wired, 4)


def test_identity_pushforward():
    m = ExactMeasure(SQUARE, [0.3, 0.4, 0.5, 0.6], 2.0)
    out = exact_pushforward(m, lambda s: [(1.0, s)])
    assert total_variation(out, m.probabilities) == 0.0


@pytest.mark.parametrize("q", [0.5, 1.0, 4.0, 9.0])
def test_single_edge_kernel_invariance(q):
    p = np.array([0.3, 0.4, 0.5, 0.6])
    bc = BoundaryCondition.wired([0, 2])
    m = ExactMeasure(SQUARE, p, q, bc)
    for e in range(4):
        out = exact_pushforward(m, lambda s, e=e: single_edge_update(s, e, SQUARE, p, q, bc))
        assert total_variation(out, m.probabilities) < 1e-14
    out = exact_pushforward(m, sweep_kernel(SQUARE, p, q, bc))
    assert total_variation(out, m.probabilities) < 1e-14


def test_kernel_weights_checked():
    m = ExactMeasure(EDGE, [0.5], 2.0)
    with pytest.raises(ValueError):
        exact_pushforward(m, lambda s: [(0.5, s)])


def test_boundary_condition_validation():
    with pytest.raises(ValueError):
        BoundaryCondition((0, 1), ((0, 1), (1,)))
    bc = BoundaryCondition.mixed([0], [0, 1, 2])
    assert bc.wired_classes() == [(1, 2)]
    assert not bc.is_free and BoundaryCondition.free([0, 1]).is_free


def test_fixture_round_trip(tmp_path):
    m = ExactMeasure(TRIANGLE, [0.5] * 3, 2.0)
    path = tmp_path / "tri.csv"
    dump_fixture(m.probabilities, str(path))
    assert np.array_equal(load_fixture(str(path)), m.probabilities)
    with pytest.raises(ValueError):
        load_fixture("a,b\n0,1\n")
