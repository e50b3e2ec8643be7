import math

import numpy as np
import pytest

from isofk.coupling import (MIXED_BLOCK, NEAR_INTERFACE, PURE_BLOCK, TRACE_COLUMNS,
                            BlockSchedule, IncrementTrace, admissible_times, classify_case,
                            compare_hyperplane_decay, conditional_drift, drift_cells,
                            run_block_coupling, step_indices, trace_csv, truncation_control)
from isofk.lattice import AngleSequence

PI = math.pi
A, B = PI / 2, PI / 3


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_schedule_exchanges_blocks(N):
    s = BlockSchedule(A, B, N, 4 * N)
    start = list(s.angles)
    s.advance()
    assert s.angles == start  # S_0 only swaps equal tracks
    for _ in range(2 * N - 1):
        s.advance()
        assert s.counts() == [(N, N)] * 2
    assert s.angles == list(AngleSequence.blocks(B, A, N).window(1, 4 * N))


@pytest.mark.parametrize("N", [2, 4, 6])
def test_no_exchange_crosses_a_period(N):
    for t in range(4 * N):
        for i in step_indices(t, N, 6 * N):
            # T_i acts on t_{i-1} and t_i, which must lie in one period of 2N tracks
            assert (i - 2) // (2 * N) == (i - 1) // (2 * N)


def test_schedule_validation_and_blocks():
    with pytest.raises(ValueError):
        BlockSchedule(A, B, 3, 12)
    with pytest.raises(ValueError):
        BlockSchedule(A, B, 4, 12)
    s = BlockSchedule.at(A, B, 4, 8, 3)
    kinds = [k for _, _, k in s.blocks()]
    assert kinds[0] == "alpha" and kinds[-1] == "beta" and "mixed" in kinds
    assert 0 in s.interfaces()
    assert BlockSchedule(A, A, 4, 8).blocks() == [(1, 8, "alpha")]


def test_case_classification():
    N = 16
    s = BlockSchedule.at(A, B, N, 2 * N, 0)
    lat = s.lattice(8)
    assert classify_case(lat, s, (8, 0), R=4, pure_margin=4) == PURE_BLOCK
    assert classify_case(lat, s, (15, 0), R=4, pure_margin=4) == NEAR_INTERFACE
    m = BlockSchedule.at(A, B, N, 2 * N, N)
    blocks = m.blocks()
    first, last, kind = max(blocks, key=lambda b: (b[2] == "mixed", b[1] - b[0]))
    assert kind == "mixed"
    centre = (first + last) // 2
    lat = m.lattice(8)
    assert classify_case(lat, m, (centre, 0), R=2, pure_margin=2) == MIXED_BLOCK


def test_equal_angles_give_zero_increments():
    tr, chain = run_block_coupling(B, B, 4, 4.5, 16, 0.0, seed=1, burn_in=20)
    assert tr.delta and all(d == 0 for d in tr.delta)
    assert len(tr.E) == len(tr.delta) + 1 and len(tr.t) == len(tr.delta)


def test_increments_bounded_by_four():
    for rep in range(6):
        tr, _ = run_block_coupling(A, B, 4, 4.2, 16, 0.4, seed=2, replica=rep, burn_in=20)
        assert max(abs(d) for d in tr.delta) <= 4
    with pytest.raises(ValueError):
        run_block_coupling(A, B, 4, 4.2, 16, 1.5 * PI)


def test_drift_statistics_on_synthetic_traces():
    tr = IncrementTrace(0, t=[2, 4, 6, 8], E=[0.0, 1.0, 0.5, 1.5, 1.5],
                        delta=[1.0, -0.5, 1.0, 0.0], bins=[0, 1, 0, 1], cases=[1, 2, 3, 2])
    (a, b), (c, d) = admissible_times(4, 0.25)
    assert (a, b, c, d) == (1.0, 3.0, 5.0, 8.0)
    pooled = conditional_drift([tr], 1.0, None, 4, delta=0.25)
    # t = 4 falls in the excluded band around N
    assert pooled.count == 3 and pooled.mean == pytest.approx(2 / 3)
    assert conditional_drift([tr], 1.0, 0, 4, delta=0.25).count == 2
    assert conditional_drift([tr], 1.0, 7, 4).count == 0
    cells = drift_cells([tr], 1.0, 4, delta=0.25)
    assert set(cells) == {(2, 0), (6, 0), (8, 1)}
    text = trace_csv([tr], "abc")
    lines = text.splitlines()
    assert lines[0] == "# manifest-sha256=abc"
    assert lines[1] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 2 + 4


def test_hyperplane_comparison_and_truncation():
    res = compare_hyperplane_decay(A, A, 4.5, PI / 2, 0.5, [2], runs=4, width=12, burn_in=10)
    assert res[0].N == 2 and res[0].holds()
    tr, chain = run_block_coupling(A, B, 4, 4.5, 16, PI / 2, seed=3, burn_in=20)
    full, below = truncation_control(chain.config, PI / 2, 2.0, 4)
    assert full or not below


def test_pure_block_steps_never_lower_the_extremum():
    seen = 0
    for rep in range(40):
        tr, _ = run_block_coupling(A, B, 8, 4.5, 32, PI / 2, seed=5, replica=rep, burn_in=30,
                                   n_tracks=32)
        for d, c in zip(tr.delta, tr.cases):
            if c == PURE_BLOCK:
                seen += 1
                assert d >= -1e-9
    assert seen >= 5
