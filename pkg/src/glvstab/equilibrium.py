"""Positive equilibria of the reduced system.

A positive equilibrium solves x^a1 y^b1 = k2/k1 and x^a3 y^b3 = k3/k4, i.e. the
log-linear system C (ln x, ln y)^T = (ln(k2/k1), ln(k3/k4))^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import as_reduced

UNIQUE = "Unique"
INFINITE = "InfiniteSet"
EMPTY = "Empty"

RANGE_TOL = 1e-10


@dataclass(frozen=True)
class EquilibriumResult:
    kind: str
    det_c: float
    x: Optional[float] = None
    y: Optional[float] = None
    # log coordinates are kept so callers never lose precision to over/underflow
    u: Optional[float] = None
    v: Optional[float] = None

    @property
    def point(self):
        return (self.x, self.y)

    def to_dict(self):
        d = {"kind": self.kind, "detC": self.det_c}
        if self.kind == UNIQUE:
            d.update(x=self.x, y=self.y)
        return d


def log_rhs(sys):
    return (math.log(sys.k2) - math.log(sys.k1), math.log(sys.k3) - math.log(sys.k4))


def _exp(t):
    # for nearly singular C the point may not be representable; u, v stay exact
    try:
        return math.exp(t)
    except OverflowError:
        return math.inf


def solve_equilibrium(sys) -> EquilibriumResult:
    red = as_reduced(sys)
    det = red.det_c
    l1, l2 = log_rhs(red)
    if det != 0.0:
        u = (red.b3 * l1 - red.b1 * l2) / det
        v = (-red.a3 * l1 + red.a1 * l2) / det
        return EquilibriumResult(UNIQUE, det, _exp(u), _exp(v), u, v)

    c = red.matrix
    rhs = np.array([l1, l2])
    sol, *_ = np.linalg.lstsq(c, rhs, rcond=None)
    residual = float(np.linalg.norm(c @ sol - rhs))
    if residual <= RANGE_TOL * max(1.0, float(np.linalg.norm(rhs))):
        return EquilibriumResult(INFINITE, det)
    return EquilibriumResult(EMPTY, det)


def equilibrium_point(sys):
    """(x*, y*) or None when there is no unique positive equilibrium."""
    res = solve_equilibrium(sys)
    if res.kind != UNIQUE:
        return None
    return res.x, res.y
