"""Constructive stability and instability evidence.

Every certificate carries a numerical verification report. A grid check is
evidence, not a proof; reports are tagged ``"verification": "numerical"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibrium import UNIQUE, solve_equilibrium
from .errors import NumericalFailure, PreconditionError, ValidationError
from .model import ReducedSystem, as_reduced, monomial

DEFAULT_HALF_WIDTH = math.log(1e3)
DEFAULT_GRID = 201
ZERO_TOL = 1e-12


def _equilibrium(red):
    eq = solve_equilibrium(red)
    if eq.kind != UNIQUE:
        raise PreconditionError("no unique positive equilibrium (det C = 0)")
    return eq


def log_grid(center, half_width=DEFAULT_HALF_WIDTH, n=DEFAULT_GRID):
    """Meshgrid over the log box center + [-L, L]^2; returns (x, y, u, v)."""
    cu, cv = center
    s = np.linspace(-half_width, half_width, n)
    u, v = np.meshgrid(cu + s, cv + s, indexing="ij")
    return np.exp(u), np.exp(v), u, v


# ---------------------------------------------------------------- Dulac


@dataclass(frozen=True)
class DulacCertificate:
    p: float
    q: float
    sign: str  # NegativeEverywhere | NonPositive | NonPositiveOffDiagonal
    branch: str  # generic | triangle
    verification: dict
    system: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verification["passed"]

    def to_dict(self):
        return {
            "kind": "Dulac",
            "branch": self.branch,
            "dulac_function": "x^(-p) y^(-q)",
            "p": self.p,
            "q": self.q,
            "sign": self.sign,
            "system": self.system,
            "verification": self.verification,
        }


def dulac_divergence(red: ReducedSystem, p, q, x, y):
    """div(h f, h g) / h for h = x^-p y^-q on the reduced field."""
    return (
        red.k1 * (red.a1 - p) * monomial(x, y, red.a1 - 1, red.b1)
        + red.k2 * p / x
        - red.k3 * q / y
        + red.k4 * (q - red.b3) * monomial(x, y, red.a3, red.b3 - 1)
    )


def dulac_generic(sys, p=None, q=None, half_width=DEFAULT_HALF_WIDTH, n=DEFAULT_GRID):
    """Dulac function x^-p y^-q for a1 <= 0 <= b3; p, q default to a1/2, b3/2."""
    red = as_reduced(sys)
    a1, b3 = red.a1, red.b3
    if not (a1 <= 0 <= b3) or (a1 == 0 and b3 == 0):
        raise PreconditionError(f"generic Dulac function needs a1 <= 0 <= b3, (a1, b3) != (0, 0); got a1={a1}, b3={b3}")
    p = a1 / 2 if p is None else float(p)
    q = b3 / 2 if q is None else float(q)
    if not (a1 <= p <= 0 <= q <= b3):
        raise PreconditionError(f"need a1 <= p <= 0 <= q <= b3, got p={p}, q={q}")
    eq = _equilibrium(red)
    x, y, _, _ = log_grid((eq.u, eq.v), half_width, n)
    div = dulac_divergence(red, p, q, x, y)
    worst = float(np.max(div))
    report = {
        "verification": "numerical",
        "box": [[eq.u - half_width, eq.u + half_width], [eq.v - half_width, eq.v + half_width]],
        "samples": int(div.size),
        "worst": worst,
        "passed": bool(worst < 0 and np.all(np.isfinite(div))),
    }
    return DulacCertificate(p, q, "NegativeEverywhere", "generic", report, red.to_dict())


def triangle_pq(alpha, beta):
    det_j = alpha * beta - alpha + 1
    p = alpha - (alpha - 1) * beta / det_j
    q = beta + (alpha - 1) ** 2 * beta / det_j
    return p, q


def triangle_v(alpha, beta, p, q, x, y):
    return (
        (alpha - p) * x ** (alpha - 1)
        + (p - 1) * y ** beta
        + (beta - q) * x * y ** (beta - 1)
        + q - 1
    )


def dulac_triangle(alpha, beta, half_width=DEFAULT_HALF_WIDTH, n=DEFAULT_GRID):
    """Dulac function for the (alpha, beta) family inside 1 < alpha <= 3/2, alpha-1 <= beta <= 2-alpha.

    p and q are the unique exponents for which grad v vanishes at (1, 1).
    """
    alpha, beta = float(alpha), float(beta)
    if not (1 < alpha <= 1.5 + ZERO_TOL and alpha - 1 - ZERO_TOL <= beta <= 2 - alpha + ZERO_TOL):
        raise PreconditionError(f"(alpha, beta) = ({alpha}, {beta}) outside the triangle")
    p, q = triangle_pq(alpha, beta)
    diagonal = abs(beta - (alpha - 1)) <= ZERO_TOL

    x, y, u, v = log_grid((0.0, 0.0), half_width, n)
    vals = triangle_v(alpha, beta, p, q, x, y)
    v11 = float(triangle_v(alpha, beta, p, q, 1.0, 1.0))
    scale = 1.0 + float(np.max(np.abs(vals)))
    tol = 1e-12 * scale
    step = 2 * half_width / (n - 1)

    if diagonal:
        near_locus = np.abs(u - v) <= step * (1 + 1e-9)
    else:
        near_locus = np.maximum(np.abs(u), np.abs(v)) <= step * (1 + 1e-9)
    worst = float(np.max(vals))
    i_max = np.unravel_index(np.argmax(vals), vals.shape)
    off_locus_max = float(np.max(np.where(near_locus, -np.inf, vals)))
    ok = worst <= v11 + tol and off_locus_max < v11 and v11 <= tol
    if diagonal:
        on_diag = np.abs(u - v) <= 1e-12
        ok = ok and float(np.max(np.abs(vals[on_diag] - v11))) <= tol
    report = {
        "verification": "numerical",
        "box": [[-half_width, half_width], [-half_width, half_width]],
        "samples": int(vals.size),
        "v11": v11,
        "worst": worst,
        "argmax": [float(x[i_max]), float(y[i_max])],
        "locus": "diagonal" if diagonal else "point",
        "off_locus_max": off_locus_max,
        "passed": bool(ok),
    }
    if diagonal:
        sign = "NonPositiveOffDiagonal"
    elif v11 < -tol:
        sign = "NegativeEverywhere"
    else:
        sign = "NonPositive"
    return DulacCertificate(p, q, sign, "triangle", report, {"alpha": alpha, "beta": beta})


# ---------------------------------------------------------------- first integral / Lyapunov


def _phi(s, s_star, e):
    """Antiderivative of 1 - (s/s*)^e vanishing at s = s*."""
    r = np.log(s / s_star)
    if e == -1.0:
        return (s - s_star) - s_star * r
    return (s - s_star) - s_star * np.expm1((e + 1) * r) / (e + 1)


@dataclass(frozen=True)
class FirstIntegralV:
    x_star: float
    y_star: float
    a3: float
    b1: float
    k2: float
    k3: float

    @property
    def log_branch_x(self):
        return self.a3 == -1.0

    @property
    def log_branch_y(self):
        return self.b1 == -1.0

    def __call__(self, x, y):
        return self.k3 * _phi(x, self.x_star, self.a3) + self.k2 * _phi(y, self.y_star, self.b1)

    def gradient(self, x, y):
        return (
            self.k3 * (1 - (x / self.x_star) ** self.a3),
            self.k2 * (1 - (y / self.y_star) ** self.b1),
        )

    def to_dict(self):
        return {
            "kind": "FirstIntegral",
            "x_star": self.x_star,
            "y_star": self.y_star,
            "a3": self.a3,
            "b1": self.b1,
            "k2": self.k2,
            "k3": self.k3,
            "log_branch_x": self.log_branch_x,
            "log_branch_y": self.log_branch_y,
        }


def first_integral(sys, eq=None) -> FirstIntegralV:
    """V with dV/dx = k3 (1 - (x/x*)^a3), dV/dy = k2 (1 - (y/y*)^b1), V(x*, y*) = 0.

    Conserved when (a1, b3) = (0, 0); a Lyapunov function when exactly one of them vanishes.
    """
    red = as_reduced(sys)
    if eq is None:
        e = _equilibrium(red)
        eq = (e.x, e.y)
    return FirstIntegralV(float(eq[0]), float(eq[1]), red.a3, red.b1, red.k2, red.k3)


def lyapunov_derivative(red: ReducedSystem, V: FirstIntegralV, x, y):
    """dV/dt along the reduced field in the factored form."""
    xs, ys = V.x_star, V.y_star
    pre = monomial(x, y, red.a3, red.b1)
    if red.b3 == 0:
        return pre * red.k1 * red.k3 * (x ** -red.a3 - xs ** -red.a3) * (x ** red.a1 - xs ** red.a1)
    return pre * (-red.k2 * red.k4) * (y ** -red.b1 - ys ** -red.b1) * (y ** red.b3 - ys ** red.b3)


def lyapunov_derivative_sign(sys, V: Optional[FirstIntegralV] = None, half_width=DEFAULT_HALF_WIDTH, n=DEFAULT_GRID):
    red = as_reduced(sys)
    case_b3 = red.a1 < 0 and red.b3 == 0
    case_a1 = red.a1 == 0 and red.b3 > 0
    if not (case_b3 or case_a1):
        raise PreconditionError("need a1 < 0 = b3 or a1 = 0 < b3")
    if not red.det_c < 0:
        raise PreconditionError("need det C < 0")
    if V is None:
        V = first_integral(red)
    expected = "nonpositive" if red.a3 < 0 else "nonnegative"
    x, y, _, _ = log_grid((math.log(V.x_star), math.log(V.y_star)), half_width, n)
    vdot = lyapunov_derivative(red, V, x, y)
    scale = np.abs(vdot).max() + 1.0
    if expected == "nonpositive":
        ok = bool(np.max(vdot) <= 1e-14 * scale)
    else:
        ok = bool(np.min(vdot) >= -1e-14 * scale)
    return {
        "kind": "LyapunovBound",
        "case": "b3=0" if case_b3 else "a1=0",
        "expected_sign": expected,
        "bounded_level_sets": "sublevel" if expected == "nonpositive" else "superlevel",
        "verification": "numerical",
        "samples": int(vdot.size),
        "max": float(np.max(vdot)),
        "min": float(np.min(vdot)),
        "passed": ok,
    }


# ---------------------------------------------------------------- forward-invariant sets

L1, L2, L3, L4 = "L1", "L2", "L3", "L4"
SET_SHAPES = {
    L1: "{x >= x0, 0 < y <= x^gamma}",
    L2: "{x >= x0, y >= x^gamma}",
    L3: "{0 < x <= x0, x0^gamma <= y <= x^gamma}",
    L4: "{x >= x0, x0^gamma <= y <= x^gamma}",
}
BOUNDARY_SAMPLES = 64
BOUNDARY_SPAN = 1e4
MARGIN = 1e-6
MAX_DOUBLINGS = 60
MAX_GAMMA_STEPS = 8


@dataclass(frozen=True)
class InvariantSetCertificate:
    lemma: str
    gamma: float
    x0: float
    report: dict
    system: dict = field(default_factory=dict)

    def contains(self, x, y):
        """Membership test, compared in logs so sets beyond the float range still work."""
        if not (x > 0 and y > 0):
            return False
        g, lx0 = self.gamma, math.log(self.x0)
        lx, ly = math.log(x), math.log(y)
        if self.lemma == L1:
            return lx >= lx0 and ly <= g * lx
        if self.lemma == L2:
            return lx >= lx0 and ly >= g * lx
        if self.lemma == L3:
            return lx <= lx0 and g * lx0 <= ly <= g * lx
        return lx >= lx0 and g * lx0 <= ly <= g * lx

    def interior_point(self):
        g, x0 = self.gamma, self.x0
        if self.lemma == L1:
            x = 2 * x0
            return x, math.exp(g * math.log(x) - math.log(2))
        if self.lemma == L2:
            x = 2 * x0
            return x, math.exp(g * math.log(x) + math.log(2))
        if self.lemma == L3:
            x = x0 / 2
            return x, math.exp(0.5 * g * (math.log(x0) + math.log(x)))
        x = 2 * x0
        return x, math.exp(0.5 * g * (math.log(x0) + math.log(x)))

    def to_dict(self):
        return {
            "kind": "InvariantSet",
            "lemma": self.lemma,
            "set": SET_SHAPES[self.lemma],
            "gamma": self.gamma,
            "x0": self.x0,
            "system": self.system,
            "report": self.report,
        }


def matching_lemma(a1, b1, a3, b3):
    """First of L1..L4 whose sign pattern and side condition hold, or None. Requires det C < 0."""
    det = a1 * b3 - b1 * a3
    if not det < 0:
        return None
    if a1 < 0 and b1 < 0 and a3 < 0 and b3 < 0 and (1 + b1 - b3 > 0 or det > a3 + b3):
        return L1
    if a1 < 0 and b1 > 0 and a3 > 0 and b3 < 0 and det > a3 + b3:
        return L2
    if a1 > 0 and b1 > 0 and a3 > 0 and b3 > 0:
        return L3
    if a1 > 0 and b1 < 0 and a3 < 0 and b3 > 0 and (a1 > 1 or a1 + b1 > 0):
        return L4
    return None


def _snap(value, scale):
    """Exact zero for rounding residue; sums like 1 + b1 - b3 vanish identically on some families."""
    return 0.0 if abs(value) <= ZERO_TOL * scale else value


def _gamma_schedule(lemma, a1, b1, a3, b3):
    """Initial gamma and the escalation rule (None when a midpoint is prescribed)."""
    if lemma == L1:
        hi = -a3 / b3
        s = _snap(1 + b1 - b3, 1 + abs(b1) + abs(b3))
        if s > 0:
            hi = min(hi, (1 - a1 + a3) / s)
            return hi - 1, "double"
        if s == 0:
            return hi - 1, "double"
        lo = (1 - a1 + a3) / s
        return (lo + hi) / 2, None
    if lemma == L2:
        lo, hi = -a3 / b3, (1 - a1) / (1 + b1)
        return (lo + hi) / 2, None
    if lemma == L3:
        return -a1 / b1 / 2, None
    hi = -a1 / b1
    t = _snap(1 + b1, 1 + abs(b1))
    if t == 0:
        return hi / 2, None
    if t > 0:
        lo = max(0.0, (1 - a1) / t)
        return (lo + hi) / 2, None
    hi = min(hi, (a1 - 1) / -t)
    return hi / 2, "halve"


def _boundary_pieces(lemma, gamma, x0):
    """Samples and inward normals on each boundary piece, all in log form.

    Each piece is (lx, ly, s1, l1, s2, l2): log coordinates of the samples and the
    normal (s1 e^l1, s2 e^l2). Sets can sit far outside the float range (y = x^gamma
    with x0 ~ 1e13 and gamma ~ -20), so nothing here is exponentiated.
    """
    t = np.linspace(0.0, 1.0, BOUNDARY_SAMPLES) * math.log(BOUNDARY_SPAN)
    g = gamma
    lx0 = math.log(x0)
    lxs = lx0 - t if lemma == L3 else lx0 + t
    lys = g * lxs
    one = np.ones_like(t)
    zero = np.zeros_like(t)
    nolog = np.full_like(t, -np.inf)
    # slope of y = x^g is g x^(g-1)
    ls = math.log(abs(g)) + (g - 1) * lxs if g != 0 else nolog
    sg = math.copysign(1.0, g) if g != 0 else 0.0
    pieces = {}
    if lemma == L2:
        pieces["curve"] = (lxs, lys, -sg * one, ls, one, zero)
    else:
        pieces["curve"] = (lxs, lys, sg * one, ls, -one, zero)
    ly0 = g * lx0
    if lemma == L1:
        pieces["vertical"] = (lx0 * one, ly0 - t, one, zero, zero, nolog)
    elif lemma == L2:
        pieces["vertical"] = (lx0 * one, ly0 + t, one, zero, zero, nolog)
    else:
        pieces["horizontal"] = (lxs, ly0 * one, zero, nolog, one, zero)
    return pieces


def inward_margin(red, lx, ly, s1, l1, s2, l2):
    """Normal component of the field, normalized by the magnitude of its two contributions.

    The field terms n1 k1 x^a1 y^b1, -n1 k2, n2 k3, -n2 k4 x^a3 y^b3 are combined
    after scaling by the largest one, so huge or tiny samples stay finite.
    """
    logs = np.stack([
        l1 + math.log(red.k1) + red.a1 * lx + red.b1 * ly,
        l1 + math.log(red.k2) + 0 * lx,
        l2 + math.log(red.k3) + 0 * lx,
        l2 + math.log(red.k4) + red.a3 * lx + red.b3 * ly,
    ])
    signs = np.stack([s1, -s1, s2, -s2])
    top = np.max(logs, axis=0)
    with np.errstate(invalid="ignore", over="ignore"):
        w = signs * np.exp(logs - np.where(np.isfinite(top), top, 0.0))
        num = w.sum(axis=0)
        den = np.abs(w[0] + w[1]) + np.abs(w[2] + w[3])
        m = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.where(np.isfinite(m), m, -1.0)


def _check_set(red, lemma, gamma, x0):
    margins = {}
    for name, piece in _boundary_pieces(lemma, gamma, x0).items():
        margins[name] = float(np.min(inward_margin(red, *piece)))
    return min(margins.values()), margins


def invariant_set(sys, lemma=None) -> InvariantSetCertificate:
    """Forward-invariant set excluding the equilibrium, built by the lemma's recipe.

    gamma is the midpoint of the admissible interval or, where the recipe only asks
    for gamma "large/small enough", escalated geometrically. x0 is doubled (halved
    for L3) until the field points inward at every boundary sample.
    """
    red = as_reduced(sys)
    a1, b1, a3, b3 = red.exponents
    match = matching_lemma(a1, b1, a3, b3)
    if lemma is None:
        lemma = match
        if lemma is None:
            raise PreconditionError("no forward-invariant-set pattern matches these exponents")
    if lemma not in SET_SHAPES:
        raise ValidationError(f"unknown lemma {lemma!r}")
    if not _lemma_applies(lemma, a1, b1, a3, b3):
        raise PreconditionError(f"sign pattern / side conditions of {lemma} do not hold")
    eq = _equilibrium(red)

    gamma, escalate = _gamma_schedule(lemma, a1, b1, a3, b3)
    attempts = []
    for _ in range(MAX_GAMMA_STEPS if escalate else 1):
        if lemma == L3:
            x0 = 0.5 * min(1.0, eq.x)
        else:
            x0 = 2.0 * max(1.0, eq.x)
        for _ in range(MAX_DOUBLINGS + 1):
            worst, margins = _check_set(red, lemma, gamma, x0)
            if worst >= MARGIN:
                report = {
                    "verification": "numerical",
                    "boundary_samples": BOUNDARY_SAMPLES * len(margins),
                    "span": BOUNDARY_SPAN,
                    "margins": margins,
                    "min_margin": worst,
                    "equilibrium_outside": True,
                    "gamma_attempts": attempts + [gamma],
                }
                return InvariantSetCertificate(lemma, gamma, x0, report, red.to_dict())
            x0 = x0 / 2 if lemma == L3 else x0 * 2
        attempts.append(gamma)
        gamma = gamma * 2 if escalate == "double" else gamma / 2
    raise NumericalFailure(
        f"{lemma}: no x0 found after {MAX_DOUBLINGS} doublings (gammas tried: {attempts})"
    )


def _lemma_applies(lemma, a1, b1, a3, b3):
    det = a1 * b3 - b1 * a3
    if not det < 0:
        return False
    if lemma == L1:
        return a1 < 0 and b1 < 0 and a3 < 0 and b3 < 0 and (1 + b1 - b3 > 0 or det > a3 + b3)
    if lemma == L2:
        return a1 < 0 and b1 > 0 and a3 > 0 and b3 < 0 and det > a3 + b3
    if lemma == L3:
        return a1 > 0 and b1 > 0 and a3 > 0 and b3 > 0
    return a1 > 0 and b1 < 0 and a3 < 0 and b3 > 0 and (a1 > 1 or a1 + b1 > 0)


# ---------------------------------------------------------------- boundary-approach curves

B3_ZERO_GENERIC = "B3ZeroGeneric"
B3_ZERO_LOG = "B3ZeroLog"
A1_ZERO_GENERIC = "A1ZeroGeneric"
A1_ZERO_LOG1 = "A1ZeroLog1"
A1_ZERO_LOG2 = "A1ZeroLog2"


@dataclass(frozen=True)
class BoundaryCurve:
    """Orbit of the auxiliary separable system that hits an axis.

    B3Zero*: y(x) for 0 < x < x*, reaching (x*, 0).
    A1Zero*: x(y) for y > y*, reaching (0, y*).
    """

    case: str
    red: ReducedSystem
    x_star: float
    y_star: float

    @property
    def variable(self):
        return "x" if self.case.startswith("B3") else "y"

    def __call__(self, s):
        r = self.red
        s = np.asarray(s, dtype=float)
        if self.case.startswith("B3"):
            xs = self.x_star
            e1 = 1 - r.a1
            term1 = r.k3 * (s ** e1 - xs ** e1) / e1
            if self.case == B3_ZERO_LOG:
                term2 = r.k4 * (np.log(s) - math.log(xs))
            else:
                e2 = 1 + r.a3 - r.a1
                term2 = r.k4 * (s ** e2 - xs ** e2) / e2
            bracket = (r.b1 + 1) / r.k1 * (term1 - term2)
            return np.maximum(bracket, 0.0) ** (1 / (r.b1 + 1))
        ys = self.y_star
        if self.case == A1_ZERO_LOG1:
            term1 = r.k1 * (np.log(s) - math.log(ys))
        elif self.case == A1_ZERO_LOG2:
            term1 = r.k1 * (s ** r.b1 - ys ** r.b1) / r.b1
        else:
            e1 = 1 + r.b1 - r.b3
            term1 = r.k1 * (s ** e1 - ys ** e1) / e1
        if self.case == A1_ZERO_LOG2:
            term2 = r.k2 * (np.log(s) - math.log(ys))
        else:
            e2 = 1 - r.b3
            term2 = r.k2 * (s ** e2 - ys ** e2) / e2
        bracket = -(r.a3 + 1) / r.k4 * (term1 - term2)
        return np.maximum(bracket, 0.0) ** (1 / (r.a3 + 1))

    def domain(self):
        if self.variable == "x":
            return (0.0, self.x_star)
        return (self.y_star, math.inf)

    def to_dict(self):
        return {
            "kind": "BoundaryCurve",
            "case": self.case,
            "variable": self.variable,
            "domain": [self.domain()[0], None if math.isinf(self.domain()[1]) else self.domain()[1]],
            "endpoint": [self.x_star, 0.0] if self.variable == "x" else [0.0, self.y_star],
            "system": self.red.to_dict(),
        }


def boundary_case(red: ReducedSystem):
    a1, b1, a3, b3 = red.exponents
    if a1 < 0 and b3 == 0 and a3 < 0 and -1 < b1 < 0:
        return B3_ZERO_LOG if abs(1 + a3 - a1) <= ZERO_TOL else B3_ZERO_GENERIC
    if a1 == 0 and b3 > 0 and b1 < 0 and -1 < a3 < 0:
        if abs(1 + b1 - b3) <= ZERO_TOL:
            return A1_ZERO_LOG1
        if abs(b3 - 1) <= ZERO_TOL:
            return A1_ZERO_LOG2
        return A1_ZERO_GENERIC
    return None


def boundary_curve(sys, eq=None) -> BoundaryCurve:
    red = as_reduced(sys)
    case = boundary_case(red)
    if case is None:
        raise PreconditionError(
            "boundary curve needs (a1 < 0 = b3, a3 < 0, -1 < b1 < 0) or (a1 = 0 < b3, b1 < 0, -1 < a3 < 0)"
        )
    if eq is None:
        e = _equilibrium(red)
        eq = (e.x, e.y)
    return BoundaryCurve(case, red, float(eq[0]), float(eq[1]))
