"""Stability classification: for all rate constants, for fixed rates, and for the
two-parameter (alpha, beta) family.

Boundary equalities (a1 = 0, b1 = -1, alpha + beta = 2, ...) are compared
exactly on the input values. The (alpha, beta) family is evaluated in rational
arithmetic so that grid points landing on boundary lines are labeled correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import certificates as cert
from .equilibrium import UNIQUE, solve_equilibrium
from .errors import GlvError, PreconditionError, ZipCaseError
from .focal import DEGENERATE, SUPERCRITICAL, hopf_verdict
from .local_stability import ASYMPTOTICALLY_STABLE, UNSTABLE, jacobian, linear_verdict
from .model import GlvSystem, ReducedSystem, as_reduced

# local labels
AS = "AS"
UNSTABLE_L = "Unstable"
CENTER = "Center"
DEGENERATE_HOPF = "DegenerateHopf"
INCONCLUSIVE = "Inconclusive"

# global labels
GAS = "GAS"
NOT_GAS = "NotGAS"
UNDETERMINED = "Undetermined"

# diagram labels
AS_NOT_GAS = "AS-not-GAS"
ZIP = "Zip"
DIAGRAM_LABELS = (GAS, AS_NOT_GAS, UNSTABLE_L, CENTER, ZIP, UNDETERMINED)

FIXED_K = "FixedK"
ALL_K = "AllK"


@dataclass
class StabilityVerdict:
    scope: object  # "FixedK" | "AllK" | {"AllKStoichiometric": n}
    local: str
    global_: str
    witness: Optional[dict] = None
    certificates: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def label(self):
        if self.global_ == GAS:
            return GAS
        if self.local == AS and self.global_ == NOT_GAS:
            return AS_NOT_GAS
        if self.local in (UNSTABLE_L, CENTER):
            return self.local
        return UNDETERMINED

    def to_dict(self):
        return {
            "scope": self.scope,
            "label": self.label,
            "local": self.local,
            "global": self.global_,
            "witness": self.witness,
            "certificates": self.certificates,
            "notes": self.notes,
        }


def _exponents(C):
    if isinstance(C, (GlvSystem, ReducedSystem)):
        return as_reduced(C).exponents
    arr = np.asarray(C, dtype=object)
    if arr.shape == (2, 2):
        (a1, b1), (a3, b3) = arr
    else:
        a1, b1, a3, b3 = C
    return a1, b1, a3, b3


def _scope(stoichiometric_n):
    if stoichiometric_n is None:
        return ALL_K
    return {"AllKStoichiometric": stoichiometric_n}


def _require_nonzip(a1, b1, a3, b3):
    det = a1 * b3 - b1 * a3
    if det == 0:
        raise ZipCaseError("det C = 0: zip bifurcation case, outside the classification")
    return det


def all_k_local_label(a1, b1, a3, b3):
    det = _require_nonzip(a1, b1, a3, b3)
    if det > 0:
        return UNSTABLE_L
    if a1 <= 0 <= b3:
        return CENTER if (a1 == 0 and b3 == 0) else AS
    # the trace a1 k2/x* - b3 k3/y* has a fixed positive sign when a1 >= 0 >= b3
    if a1 >= 0 >= b3:
        return UNSTABLE_L
    return INCONCLUSIVE


def classify_all_k_local(C, stoichiometric_n=None) -> StabilityVerdict:
    """Local stability for every choice of rate constants.

    AS for all k iff det C < 0, a1 <= 0 <= b3 and (a1, b3) != (0, 0). The verdict
    is the same when the rates are restricted to k2 = n k3 (pass ``stoichiometric_n``).
    """
    a1, b1, a3, b3 = _exponents(C)
    lab = all_k_local_label(a1, b1, a3, b3)
    notes = []
    if lab == INCONCLUSIVE:
        notes.append("trace sign depends on k: AS for some rates, unstable for others")
    elif lab == CENTER:
        notes.append("a1 = b3 = 0: first integral, the equilibrium is a center for all k")
    elif lab == UNSTABLE_L:
        notes.append("saddle for all k" if a1 * b3 - b1 * a3 > 0 else "positive trace for all k")
    return StabilityVerdict(_scope(stoichiometric_n), lab, UNDETERMINED, notes=notes)


def all_k_global_holds(a1, b1, a3, b3):
    det = _require_nonzip(a1, b1, a3, b3)
    if not det < 0:
        return False
    return (
        (a1 < 0 < b3)
        or (a1 < 0 == b3 and a3 < 0 and b1 <= -1)
        or (a1 == 0 < b3 and a3 <= -1 and b1 < 0)
    )


def _rates_tuple(rates):
    return tuple(float(k) for k in rates)


def _reduced(a1, b1, a3, b3, rates=(1.0, 1.0, 1.0, 1.0)):
    k1, k2, k3, k4 = _rates_tuple(rates)
    return ReducedSystem(float(a1), float(b1), float(a3), float(b3), k1, k2, k3, k4)


def preclude_global(C, rates=(1.0, 1.0, 1.0, 1.0)):
    """Try the forward-invariant-set patterns L1..L4; certificate or None."""
    a1, b1, a3, b3 = _exponents(C)
    if cert.matching_lemma(float(a1), float(b1), float(a3), float(b3)) is None:
        return None
    try:
        return cert.invariant_set(_reduced(a1, b1, a3, b3, rates))
    except GlvError:
        return None


def _boundary_witness(a1, b1, a3, b3, rates=(1.0, 1.0, 1.0, 1.0)):
    red = _reduced(a1, b1, a3, b3, rates)
    if cert.boundary_case(red) is None:
        return None
    curve = cert.boundary_curve(red)
    return {"kind": "BoundaryApproach", "curve": curve.to_dict()}


def _local_witness(label, detail):
    return {"kind": "LocalInstability", "local": label, "detail": detail}


def classify_all_k_global(C, stoichiometric_n=None, certify=True) -> StabilityVerdict:
    """Global stability for every choice of rate constants.

    GAS for all k iff det C < 0 and one of
    a1 < 0 < b3;  a1 < 0 = b3, a3 < 0, b1 <= -1;  a1 = 0 < b3, a3 <= -1, b1 < 0.
    Otherwise NotGAS with the strongest witness available.
    """
    a1, b1, a3, b3 = _exponents(C)
    local = all_k_local_label(a1, b1, a3, b3)
    scope = _scope(stoichiometric_n)
    if all_k_global_holds(a1, b1, a3, b3):
        certs = []
        if certify and a1 < 0 < b3:
            try:
                certs.append(cert.dulac_generic(_reduced(a1, b1, a3, b3)).to_dict())
            except GlvError:
                pass
        elif certify:
            red = _reduced(a1, b1, a3, b3)
            certs.append(cert.first_integral(red).to_dict())
            certs.append(cert.lyapunov_derivative_sign(red))
        return StabilityVerdict(scope, local, GAS, certificates=certs)

    certs = []
    witness = None
    notes = []
    if local != AS:
        witness = _local_witness(local, "not locally asymptotically stable for some rate constants")
    inv = preclude_global((a1, b1, a3, b3)) if certify else None
    if inv is not None:
        certs.append(inv.to_dict())
        witness = {"kind": "InvariantSet", "lemma": inv.lemma, "gamma": inv.gamma, "x0": inv.x0}
    if witness is None:
        witness = _boundary_witness(a1, b1, a3, b3)
        if witness is not None:
            certs.append(witness["curve"])
    if witness is None:
        detail = "all-k global conditions fail; GAS fails for some rate constants"
        if (a1 < 0 == b3 or a1 == 0 < b3) and a3 > 0 and b1 > 0:
            detail = "some solutions approach the boundary of the positive quadrant (a3, b1 > 0)"
        witness = {"kind": "Theorem", "detail": detail}
        notes.append("no constructive witness for these exponents")
    return StabilityVerdict(scope, local, NOT_GAS, witness=witness, certificates=certs, notes=notes)


# ---------------------------------------------------------------- fixed rates


def _alpha_beta_of(red):
    """(alpha, beta) when ``red`` is the reduction of the unit-rate (alpha, beta) family, else None."""
    if red.rates != (1.0, 1.0, 1.0, 1.0) or red.a3 != -1 or red.b3 != 1 + red.b1:
        return None
    return _frac(float(red.a1)) + 1, -_frac(float(red.b1))


def classify_system(sys, certify=True) -> StabilityVerdict:
    """Classification at the given rate constants."""
    red = as_reduced(sys)
    a1, b1, a3, b3 = red.exponents
    if red.det_c == 0:
        raise ZipCaseError("det C = 0: zip bifurcation case, outside the classification")
    eq = solve_equilibrium(red)
    if eq.kind != UNIQUE:
        raise PreconditionError("no unique positive equilibrium")
    rep = jacobian(red, (eq.x, eq.y))
    notes = [f"eigen class {rep.eigen_class}"]
    lin = linear_verdict(rep)
    if lin == ASYMPTOTICALLY_STABLE:
        local = AS
    elif lin == UNSTABLE:
        local = UNSTABLE_L
    elif a1 == 0 and b3 == 0:
        local = CENTER
        notes.append("first integral: all nearby orbits closed")
    else:
        fr = hopf_verdict(red)
        notes.append(f"trace zero, first focal value sign {fr.d1!r} ({fr.criticality})")
        if fr.criticality == SUPERCRITICAL:
            local = AS
        elif fr.criticality == DEGENERATE:
            local = DEGENERATE_HOPF
        else:
            local = UNSTABLE_L

    if local == DEGENERATE_HOPF:
        notes.append("vanishing first focal value; higher-order terms decide")
        # an invariant set still rules out global convergence whatever the local type
        inv = preclude_global(red, red.rates) if certify and red.det_c < 0 else None
        if inv is not None:
            w = {"kind": "InvariantSet", "lemma": inv.lemma, "gamma": inv.gamma, "x0": inv.x0}
            return StabilityVerdict(FIXED_K, local, NOT_GAS, witness=w, certificates=[inv.to_dict()], notes=notes)
        return StabilityVerdict(FIXED_K, local, UNDETERMINED, notes=notes)
    if local != AS:
        return StabilityVerdict(FIXED_K, local, NOT_GAS, witness=_local_witness(local, rep.eigen_class), notes=notes)
    if all_k_global_holds(a1, b1, a3, b3):
        return StabilityVerdict(FIXED_K, local, GAS, notes=notes + ["all-k global conditions hold"])
    ab = _alpha_beta_of(red)
    if ab is not None and alpha_beta_gas(*ab):
        return StabilityVerdict(FIXED_K, local, GAS, notes=notes + ["(alpha, beta) family with unit rates: GAS region"])
    certs = []
    inv = preclude_global(red, red.rates) if certify else None
    if inv is not None:
        certs.append(inv.to_dict())
        w = {"kind": "InvariantSet", "lemma": inv.lemma, "gamma": inv.gamma, "x0": inv.x0}
        return StabilityVerdict(FIXED_K, local, NOT_GAS, witness=w, certificates=certs, notes=notes)
    w = _boundary_witness(a1, b1, a3, b3, red.rates)
    if w is not None:
        return StabilityVerdict(FIXED_K, local, NOT_GAS, witness=w, certificates=[w["curve"]], notes=notes)
    if ab is not None:
        w = {"kind": "Theorem", "detail": "(alpha, beta) family outside the GAS region"}
        return StabilityVerdict(FIXED_K, local, NOT_GAS, witness=w, notes=notes)
    notes.append("outside the reach of the global theorems; no verdict")
    return StabilityVerdict(FIXED_K, local, UNDETERMINED, notes=notes)


# ---------------------------------------------------------------- (alpha, beta) family


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        # decimal reading of the float, so 0.05 means 1/20
        return Fraction(repr(v))
    return Fraction(v)


def alpha_beta_det(alpha, beta):
    return alpha * beta - alpha + 1


def alpha_beta_gas(alpha, beta):
    if not alpha_beta_det(alpha, beta) > 0:
        return False
    if alpha <= 1 and beta <= 1 and (alpha, beta) != (1, 1):
        return True
    return 1 < alpha <= Fraction(3, 2) and alpha - 1 <= beta <= 2 - alpha


def alpha_beta_labels(alpha, beta):
    """(local, global, hopf note or None) in exact arithmetic."""
    det = alpha_beta_det(alpha, beta)
    if det == 0:
        raise ZipCaseError(f"alpha beta - alpha + 1 = 0 at ({alpha}, {beta})")
    tr = alpha + beta - 2
    note = None
    if det < 0:
        local = UNSTABLE_L
    elif tr > 0:
        local = UNSTABLE_L
    elif tr < 0:
        local = AS
    elif alpha == 1:
        local = CENTER
    else:
        # on alpha + beta = 2 the focal sign is (alpha - 1)^2 (alpha - 2) < 0 whenever det > 0
        local = AS
        note = "trace zero; supercritical Hopf point, first focal value sign (alpha-1)^2 (alpha-2) < 0"
    if alpha_beta_gas(alpha, beta):
        glob = GAS
    else:
        glob = NOT_GAS
    return local, glob, note


def alpha_beta_label(alpha, beta):
    """Diagram label for one grid point."""
    a, b = _frac(alpha), _frac(beta)
    if alpha_beta_det(a, b) == 0:
        return ZIP
    local, glob, _ = alpha_beta_labels(a, b)
    if glob == GAS:
        return GAS
    if local == AS:
        return AS_NOT_GAS
    return local


def _ab_exponents(alpha, beta):
    return alpha - 1, -beta, Fraction(-1), 1 - beta


def classify_alpha_beta(alpha, beta, certify=True) -> StabilityVerdict:
    """x' = x^alpha - x y,  y' = x y - y^beta, all rates 1, equilibrium (1, 1)."""
    a, b = _frac(alpha), _frac(beta)
    local, glob, note = alpha_beta_labels(a, b)
    notes = [note] if note else []
    certs = []
    witness = None
    fa, fb = float(a), float(b)
    if local == CENTER:
        notes.append("classical Lotka-Volterra: all positive solutions periodic")
    if glob == GAS:
        if certify:
            if a <= 1 and b <= 1:
                certs.append(cert.dulac_generic(GlvSystem.alpha_beta(fa, fb)).to_dict())
            else:
                certs.append(cert.dulac_triangle(fa, fb).to_dict())
    elif local != AS:
        witness = _local_witness(local, "alpha + beta > 2 or saddle" if local == UNSTABLE_L else "center")
    else:
        a1, b1, a3, b3 = _ab_exponents(a, b)
        lemma = cert.matching_lemma(float(a1), float(b1), float(a3), float(b3))
        witness = {"kind": "InvariantSet", "lemma": lemma}
        if certify:
            inv = preclude_global((a1, b1, a3, b3))
            if inv is not None:
                certs.append(inv.to_dict())
                witness.update(gamma=inv.gamma, x0=inv.x0)
            else:
                notes.append("invariant-set search hit its limits; the verdict rests on the sign pattern alone")
    scope = {"AlphaBeta": [fa, fb]}
    return StabilityVerdict(scope, local, glob, witness=witness, certificates=certs, notes=notes)


def grid_axis(lo, hi, step):
    lo, hi, step = _frac(lo), _frac(hi), _frac(step)
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(math.floor((hi - lo) / step))
    return [lo + i * step for i in range(n + 1)]


def _fmt(v: Fraction):
    return repr(float(v))


def _row(cell):
    a, b = cell
    return (_fmt(a), _fmt(b), alpha_beta_label(a, b))


def region_diagram(box=((-1, 3), (-1, 3)), step="0.05", executor=None):
    """Rows (alpha, beta, label) over the box, alpha-major."""
    (alo, ahi), (blo, bhi) = box
    cells = [(a, b) for a in grid_axis(alo, ahi, step) for b in grid_axis(blo, bhi, step)]
    if executor is None:
        return [_row(c) for c in cells]
    return list(executor.map(_row, cells, chunksize=256))


def diagram_csv(rows):
    lines = ["alpha,beta,label"]
    lines += [f"{a},{b},{lab}" for a, b, lab in rows]
    return "\n".join(lines) + "\n"
