"""Linearization at the unique positive equilibrium.

At (x*, y*) the Jacobian of the full system factors as

    J = (x*)^alpha2 (y*)^beta2 * [[ a1 k2/x*,  b1 k2/y*],
                                  [-a3 k3/x*, -b3 k3/y*]]

so the positive prefactor never affects signs or the eigenvalue class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ZipCaseError
from .model import ReducedSystem, as_reduced, monomial

STABLE_NODE = "StableNode"
STABLE_FOCUS = "StableFocus"
CENTER = "Center(linear)"
UNSTABLE_FOCUS = "UnstableFocus"
UNSTABLE_NODE = "UnstableNode"
SADDLE = "Saddle"

ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
UNSTABLE = "Unstable"
INCONCLUSIVE = "Inconclusive"

RESIDUAL_TOL = 1e-8
TRACE_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class JacobianReport:
    J: np.ndarray
    trace: float
    det: float
    prefactor: float
    eigen_class: str
    # J / prefactor; finite even when the prefactor over- or underflows
    scaled: np.ndarray
    trace_scale: float
    det_c: float
    trace_is_zero: bool

    def to_dict(self):
        return {
            "J": self.J.tolist(),
            "trace": self.trace,
            "det": self.det,
            "prefactor": self.prefactor,
            "eigen_class": self.eigen_class,
        }


def trace_expression(red: ReducedSystem, x, y):
    """a1 k2/x* - b3 k3/y*, which has the sign of trace J."""
    return red.a1 * red.k2 / x - red.b3 * red.k3 / y


def equilibrium_residual(red: ReducedSystem, x, y):
    r1 = abs(red.k1 * float(monomial(x, y, red.a1, red.b1)) - red.k2) / red.k2
    r2 = abs(red.k3 - red.k4 * float(monomial(x, y, red.a3, red.b3))) / red.k3
    return max(r1, r2)


def classify_matrix(trace, det, trace_is_zero):
    if det < 0:
        return SADDLE
    if trace_is_zero:
        return CENTER
    disc = trace * trace - 4.0 * det
    if trace < 0:
        return STABLE_FOCUS if disc < 0 else STABLE_NODE
    return UNSTABLE_FOCUS if disc < 0 else UNSTABLE_NODE


def jacobian(sys, eq) -> JacobianReport:
    red = as_reduced(sys)
    if red.det_c == 0.0:
        raise ZipCaseError("det C = 0: no unique positive equilibrium")
    x, y = eq
    if not (x > 0 and y > 0):
        raise PreconditionError("equilibrium must be positive")
    res = equilibrium_residual(red, x, y)
    if not res <= RESIDUAL_TOL:
        raise PreconditionError(f"point ({x!r}, {y!r}) is not the equilibrium (residual {res:.3g})")

    if isinstance(sys, ReducedSystem):
        prefactor = 1.0
    else:
        prefactor = float(monomial(x, y, sys.alpha2, sys.beta2))

    m = np.array([
        [red.a1 * red.k2 / x, red.b1 * red.k2 / y],
        [-red.a3 * red.k3 / x, -red.b3 * red.k3 / y],
    ])
    tr_m = trace_expression(red, x, y)
    det_m = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    trace_scale = red.k2 / x + red.k3 / y
    tr_zero = abs(tr_m) <= TRACE_ZERO_TOL * trace_scale
    return JacobianReport(
        J=prefactor * m,
        trace=prefactor * tr_m,
        det=prefactor * prefactor * det_m,
        prefactor=prefactor,
        eigen_class=classify_matrix(tr_m, det_m, tr_zero),
        scaled=m,
        trace_scale=trace_scale,
        det_c=red.det_c,
        trace_is_zero=tr_zero,
    )


def linear_verdict(rep: JacobianReport) -> str:
    tr = rep.scaled[0, 0] + rep.scaled[1, 1]
    det = rep.scaled[0, 0] * rep.scaled[1, 1] - rep.scaled[0, 1] * rep.scaled[1, 0]
    if rep.det_c < 0 and tr < 0 and not rep.trace_is_zero:
        return ASYMPTOTICALLY_STABLE
    if det < 0 or (tr > 0 and not rep.trace_is_zero):
        return UNSTABLE
    return INCONCLUSIVE


def eigenvalues(rep: JacobianReport):
    tr, det = rep.trace, rep.det
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        s = math.sqrt(disc)
        return complex((tr - s) / 2), complex((tr + s) / 2)
    s = math.sqrt(-disc)
    return complex(tr / 2, -s / 2), complex(tr / 2, s / 2)
