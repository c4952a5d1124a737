"""First focal values and Hopf criticality.

Partial derivatives are passed as 4x4 arrays ``f[i, j] = d^{i+j} f / dx^i dy^j``
evaluated at the equilibrium (entries with i + j > 3 are ignored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import solve_equilibrium, UNIQUE
from .errors import PreconditionError, ValidationError
from .local_stability import TRACE_ZERO_TOL, trace_expression
from .model import DancsoForm, as_reduced

SUPERCRITICAL = "Supercritical"
SUBCRITICAL = "Subcritical"
DEGENERATE = "Degenerate"

POWER_POWER = "PowerPower"
EXP_POWER = "ExpPower"
EXP_EXP = "ExpExp"


@dataclass(frozen=True)
class FocalReport:
    d1: float
    D1: float
    criticality: str
    K: float

    def to_dict(self):
        return {"d1": self.d1, "D1": self.D1, "criticality": self.criticality, "K": self.K}


def d1_sign_expr(a1, b1, a3, b3):
    """Expression with the sign of the first focal value on the trace-zero locus."""
    return a3 * ((1 + a3 - a1) * b1 * b3 - a1 * a3 * (1 + b1 - b3))


def dancso_G(p_hat, q_hat, p, q):
    """Corrected focal-value sign expression in the Dancso coordinates."""
    return p * (p * (p_hat - p) * (q_hat - 1) - q * (q_hat - q) * (p_hat - 1))


def dancso_G_form(form: DancsoForm):
    return dancso_G(form.p_hat, form.q_hat, form.p, form.q)


def falling(a, n):
    out = 1.0
    for i in range(n):
        out *= a - i
    return out


def monomial_partials(coef, a, b, x=1.0, y=1.0):
    """Partials up to order 3 of coef * x^a y^b at (x, y), in closed form."""
    d = np.zeros((4, 4))
    for i in range(4):
        for j in range(4 - i):
            d[i, j] = coef * falling(a, i) * falling(b, j) * x ** (a - i) * y ** (b - j)
    return d


def exp_partials(coef, a, axis, z=0.0):
    """Partials of coef * exp(a z_axis) at z_axis = z."""
    d = np.zeros((4, 4))
    for n in range(4):
        idx = (n, 0) if axis == 0 else (0, n)
        d[idx] = coef * a ** n * math.exp(a * z)
    return d


def _strudel(f, g):
    a, b, c = f[1, 0], f[0, 1], g[1, 0]
    w2 = -a * a - b * c
    if not w2 > 0:
        raise PreconditionError(f"det J = {w2!r} must be positive at a Hopf point")
    rhs = b * (
        w2 * (-2 * a * (f[2, 1] + g[1, 2]) + b * (f[3, 0] + g[2, 1]) - c * (f[1, 2] + g[0, 3]))
        + a * b * (f[2, 0] ** 2 - f[2, 0] * g[1, 1] - f[1, 1] * g[2, 0] - g[2, 0] * g[0, 2] - 2 * g[1, 1] ** 2)
        + a * c * (-f[2, 0] * f[0, 2] - 2 * f[1, 1] ** 2 - f[1, 1] * g[0, 2] - f[0, 2] * g[1, 1] + g[0, 2] ** 2)
        + (b * c - 2 * a * a) * (f[2, 0] * f[1, 1] - g[1, 1] * g[0, 2])
        + b * b * g[2, 0] * (f[2, 0] + g[1, 1])
        - c * c * f[0, 2] * (f[1, 1] + g[0, 2])
    )
    return rhs / (16.0 * b * b * w2)


def focal_value_general(f, g):
    """First focal value D1 for a Jacobian ((a, b), (c, -a)) with positive determinant.

    Works for any orientation of the rotation. A vanishing J12 cannot occur when
    the trace is zero and the determinant positive, but is handled by swapping
    x and y (F_ij = g_ji, G_ij = f_ji) before evaluating.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f[0, 1] == 0.0:
        f, g = g.T.copy(), f.T.copy()
    return _strudel(f, g)


def focal_value_normal_form(f, g, omega):
    """16 D1 for J = ((0, -omega), (omega, 0))."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return (
        f[3, 0] + f[1, 2] + g[2, 1] + g[0, 3]
        + (f[1, 1] * (f[2, 0] + f[0, 2]) - g[1, 1] * (g[2, 0] + g[0, 2]) - f[2, 0] * g[2, 0] + f[0, 2] * g[0, 2]) / omega
    ) / 16.0


def scaled_partials(a1, b1, a3, b3, K):
    """Partials at (1, 1) of x' = x^a1 y^b1 - 1, y' = K (1 - x^a3 y^b3)."""
    f = monomial_partials(1.0, a1, b1)
    f[0, 0] -= 1.0
    g = monomial_partials(-K, a3, b3)
    g[0, 0] += K
    return f, g


def _family_checks(A, B, a1, a2, b1, b2):
    det = A * B * (-a1 * b2 + b1 * a2)
    tr = A * a1 - B * b2
    if not det > 0:
        raise PreconditionError(f"det J = {det!r} must be positive")
    if abs(tr) > 1e-12 * (abs(A * a1) + abs(B * b2)):
        raise PreconditionError(f"trace J = {tr!r} must vanish")


def special_family_focal_sign(family, A, B, a1, a2, b1, b2):
    """Sign expression of the focal value for the three Dancso model families.

    PowerPower: z1' = A (z1^a1 - z2^a2),         z2' = B (z1^b1 - z2^b2)          at (1, 1)
    ExpPower:   z1' = A (e^{a1 z1} - z2^a2),     z2' = B (e^{b1 z1} - z2^b2)      at (0, 1)
    ExpExp:     z1' = A (e^{a1 z1} - e^{a2 z2}), z2' = B (e^{b1 z1} - e^{b2 z2})  at (0, 0)
    """
    _family_checks(A, B, a1, a2, b1, b2)
    if family == POWER_POWER:
        return A * b1 * ((1 + b1 - a1) * a2 * b2 - a1 * b1 * (1 + a2 - b2))
    if family == EXP_POWER:
        return -A * a1 * (1 + a2 - b2)
    if family == EXP_EXP:
        return 0.0
    raise ValidationError(f"unknown family {family!r}")


def special_family_partials(family, A, B, a1, a2, b1, b2):
    """Closed-form partials of the family's right-hand side at its equilibrium."""
    if family == POWER_POWER:
        f = monomial_partials(A, a1, 0.0) - monomial_partials(A, 0.0, a2)
        g = monomial_partials(B, b1, 0.0) - monomial_partials(B, 0.0, b2)
    elif family == EXP_POWER:
        f = exp_partials(A, a1, 0) - monomial_partials(A, 0.0, a2)
        g = exp_partials(B, b1, 0) - monomial_partials(B, 0.0, b2)
    elif family == EXP_EXP:
        f = exp_partials(A, a1, 0) - exp_partials(A, a2, 1)
        g = exp_partials(B, b1, 0) - exp_partials(B, b2, 1)
    else:
        raise ValidationError(f"unknown family {family!r}")
    return f, g


def degenerate_threshold(a1, b1, a3, b3):
    return 1e-12 * (1 + abs(a1) + abs(b1) + abs(a3) + abs(b3)) ** 3


def criticality_of(d1, a1, b1, a3, b3):
    if abs(d1) <= degenerate_threshold(a1, b1, a3, b3):
        return DEGENERATE
    return SUPERCRITICAL if d1 < 0 else SUBCRITICAL


def hopf_verdict(sys) -> FocalReport:
    red = as_reduced(sys)
    if not red.det_c < 0:
        raise PreconditionError(f"Hopf analysis needs det C < 0, got {red.det_c!r}")
    eq = solve_equilibrium(red)
    if eq.kind != UNIQUE:
        raise PreconditionError("no unique positive equilibrium")
    x, y = eq.x, eq.y
    mu = trace_expression(red, x, y)
    if abs(mu) > TRACE_ZERO_TOL * (red.k2 / x + red.k3 / y):
        raise PreconditionError(f"trace does not vanish (a1 k2/x* - b3 k3/y* = {mu!r})")
    K = red.k3 * x / (red.k2 * y)
    f, g = scaled_partials(red.a1, red.b1, red.a3, red.b3, K)
    D1 = focal_value_general(f, g)
    d1 = d1_sign_expr(red.a1, red.b1, red.a3, red.b3)
    return FocalReport(d1=d1, D1=D1, criticality=criticality_of(d1, *red.exponents), K=K)
