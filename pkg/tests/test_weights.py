import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isofk.weights import (WeightTable, branch_parameter, critical_point, dual_weight,
                           intro_weights, isoradial_weight)

PI = math.pi


def mp_weight(theta, q):
    """High-precision evaluation of the isoradial weight, branch by branch."""
    mpmath.mp.dps = 40
    theta, q = mpmath.mpf(theta), mpmath.mpf(q)
    if q < 4:
        r = mpmath.acos(mpmath.sqrt(q) / 2) / mpmath.pi
        y = mpmath.sqrt(q) * mpmath.sin(r * (mpmath.pi - theta)) / mpmath.sin(r * theta)
    elif q == 4:
        y = 2 * (mpmath.pi - theta) / theta
    else:
        r = mpmath.acosh(mpmath.sqrt(q) / 2) / mpmath.pi
        y = mpmath.sqrt(q) * mpmath.sinh(r * (mpmath.pi - theta)) / mpmath.sinh(r * theta)
    return float(y / (1 + y))


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 3.0, 4.0, 4.5, 9.0, 25.0])
@pytest.mark.parametrize("theta", [0.1, PI / 3, PI / 2, 2 * PI / 3, 3.0])
def test_weight_matches_high_precision(theta, q):
    assert isoradial_weight(theta, q) == pytest.approx(mp_weight(theta, q), abs=1e-13)


def test_q4_values():
    assert isoradial_weight(PI / 2, 4.0) == pytest.approx(2 / 3, abs=1e-15)
    assert isoradial_weight(PI / 3, 4.0) == pytest.approx(4 / 5, abs=1e-15)
    assert isoradial_weight(PI / 3, 4.0 + 1e-8) == pytest.approx(4 / 5, abs=1e-6)
    assert isoradial_weight(PI / 3, 4.0 - 1e-8) == pytest.approx(4 / 5, abs=1e-6)


@pytest.mark.parametrize("q", [1, 2, 4, 4.5, 9, 16, 100])
def test_right_angle_is_self_dual_point(q):
    assert isoradial_weight(PI / 2, q) == pytest.approx(math.sqrt(q) / (1 + math.sqrt(q)),
                                                        abs=1e-12)
    pc = critical_point(q)
    assert dual_weight(pc, q) == pytest.approx(pc, abs=1e-12)


def test_dual_weight_values():
    assert dual_weight(0.3, 1.0) == pytest.approx(0.7, abs=1e-15)
    arr = dual_weight(np.array([0.2, 0.5]), 2.0)
    assert arr.shape == (2,)


def test_intro_weights():
    pc = critical_point(9.0)
    ph, pv = intro_weights(PI / 2, 9.0)
    assert ph == pytest.approx(pc, abs=1e-14) and pv == pytest.approx(pc, abs=1e-14)
    ph, pv = intro_weights(PI / 3, 9.0)
    assert ph == pytest.approx(isoradial_weight(PI - PI / 3, 9.0), abs=1e-12)
    assert pv == pytest.approx(isoradial_weight(PI / 3, 9.0), abs=1e-12)
    assert ph / (1 - ph) * pv / (1 - pv) == pytest.approx(9.0, rel=1e-12)
    with pytest.raises(ValueError):
        intro_weights(PI / 3, 4.0)


def test_errors():
    with pytest.raises(ValueError):
        isoradial_weight(0.0, 2.0)
    with pytest.raises(ValueError):
        isoradial_weight(PI, 2.0)
    with pytest.raises(ValueError):
        isoradial_weight(1.0, -1.0)
    with pytest.raises(ValueError):
        dual_weight(1.0, 2.0)
    with pytest.raises(ValueError):
        critical_point(0.0)


def test_branch_parameter():
    assert branch_parameter(4.0) == 0.0
    assert branch_parameter(1.0) == pytest.approx(1 / 3)
    assert branch_parameter(9.0) == pytest.approx(math.acosh(1.5) / PI)


def test_weight_table_is_read_only():
    t = WeightTable.from_angles([PI / 3, PI / 2], 9.0)
    assert len(t) == 2
    with pytest.raises(ValueError):
        t.per_edge[0] = 0.5


thetas = st.floats(min_value=0.01, max_value=PI - 0.01)
qs = st.floats(min_value=0.05, max_value=200.0)


@given(thetas, qs)
def test_duality_identity(theta, q):
    p = isoradial_weight(theta, q)
    pd = isoradial_weight(PI - theta, q)
    assert dual_weight(p, q) == pytest.approx(pd, abs=1e-12)
    assert p / (1 - p) * pd / (1 - pd) == pytest.approx(q, rel=1e-10)


@given(st.floats(min_value=0.01, max_value=PI - 0.02), qs)
def test_weight_decreasing_in_theta(theta, q):
    assert isoradial_weight(theta, q) > isoradial_weight(theta + 0.01, q)


@given(thetas, st.floats(min_value=-1e-6, max_value=1e-6))
def test_continuity_across_q4(theta, dq):
    assert abs(isoradial_weight(theta, 4.0 + dq) - isoradial_weight(theta, 4.0)) < 1e-5
