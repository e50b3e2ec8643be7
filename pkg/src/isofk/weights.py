"""Isoradial edge weights for the random-cluster model.

An edge whose rhombus has angle ``theta`` (the angle not bisected by the edge)
receives the open probability ``p(theta, q)``.  The three branches of the
formula (``q < 4``, ``q = 4``, ``q > 4``) are joined continuously: inside a
narrow band around ``q = 4`` the sine/sinh ratio is replaced by its second
order expansion in the branch parameter, which avoids the ``0/0`` at ``r = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# |q - 4| below this uses the expansion around the q = 4 branch
Q4_BAND = 1e-6


def critical_point(q: float) -> float:
    """Self-dual point sqrt(q) / (1 + sqrt(q)) of the square lattice."""
    if q <= 0:
        raise ValueError(f"cluster weight must be positive, got {q}")
    s = math.sqrt(q)
    return s / (1.0 + s)


def branch_parameter(q: float) -> float:
    """Return ``r``: arccos(sqrt(q)/2)/pi for q <= 4, arccosh(sqrt(q)/2)/pi above."""
    if q <= 0:
        raise ValueError(f"cluster weight must be positive, got {q}")
    half = math.sqrt(q) / 2.0
    if q <= 4.0:
        return math.acos(min(half, 1.0)) / math.pi
    return math.acosh(half) / math.pi


def _odds(theta: np.ndarray, q: float) -> np.ndarray:
    """p / (1 - p) for the isoradial weight, vectorised over ``theta``."""
    x = math.pi - theta
    r = branch_parameter(q)
    if abs(q - 4.0) < Q4_BAND:
        # sinh(r x)/sinh(r y) = (x/y)(1 + r^2 (x^2 - y^2)/6 + O(r^4)); sin flips the sign
        s = r * r if q > 4.0 else -r * r
        ratio = (x / theta) * (1.0 + s * (x * x - theta * theta) / 6.0)
    elif q > 4.0:
        ratio = np.sinh(r * x) / np.sinh(r * theta)
    else:
        ratio = np.sin(r * x) / np.sin(r * theta)
    return math.sqrt(q) * ratio


def _check_theta(theta: np.ndarray) -> None:
    if np.any(~np.isfinite(theta)) or np.any(theta <= 0.0) or np.any(theta >= math.pi):
        raise ValueError("rhombus angle must lie strictly inside (0, pi)")


def isoradial_weight(theta, q: float):
    """Open probability of an edge with rhombus angle ``theta`` at cluster weight ``q``.

    Accepts a scalar or an array of angles; returns the same shape.
    """
    if q <= 0:
        raise ValueError(f"cluster weight must be positive, got {q}")
    arr = np.asarray(theta, dtype=float)
    _check_theta(arr)
    y = _odds(arr, q)
    p = y / (1.0 + y)
    return float(p) if np.ndim(theta) == 0 else p


def dual_weight(p, q: float):
    """Weight of the dual edge: [p/(1-p)] * [p*/(1-p*)] = q."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("edge probability must lie strictly inside (0, 1)")
    pd = q * (1.0 - arr) / (arr + q * (1.0 - arr))
    return float(pd) if np.ndim(p) == 0 else pd


def intro_weights(alpha: float, q: float) -> tuple[float, float]:
    """(p_h, p_v) on the lattice with constant transverse angle ``alpha``, q > 4.

    Computed straight from p_h/(1-p_h) = q (1-p_v)/p_v = sqrt(q) sinh(r alpha)/sinh(r(pi-alpha)),
    independently of :func:`isoradial_weight`.  The factor ``q`` makes the pair
    self-dual and gives p_h = p_v = p_c(q) at alpha = pi/2.
    """
    if not 0.0 < alpha < math.pi:
        raise ValueError("transverse angle must lie strictly inside (0, pi)")
    if q <= 4.0:
        raise ValueError("the two-weight parametrisation is stated for q > 4")
    r = branch_parameter(q)
    y = math.sqrt(q) * math.sinh(r * alpha) / math.sinh(r * (math.pi - alpha))
    return y / (1.0 + y), q / (q + y)


@dataclass(frozen=True)
class WeightTable:
    """Per-edge open probabilities of a lattice at cluster weight ``q``."""

    q: float
    r: float
    per_edge: np.ndarray

    @classmethod
    def from_angles(cls, thetas, q: float) -> "WeightTable":
        p = np.atleast_1d(isoradial_weight(np.asarray(thetas, dtype=float), q))
        p.setflags(write=False)
        return cls(q=float(q), r=branch_parameter(q), per_edge=p)

    @classmethod
    def for_lattice(cls, lattice, q: float) -> "WeightTable":
        return cls.from_angles(lattice.edge_angles, q)

    def __len__(self) -> int:
        return len(self.per_edge)
