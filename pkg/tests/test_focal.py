import math

import numpy as np
import pytest

from glvstab.errors import PreconditionError, ValidationError
from glvstab.focal import (
    DEGENERATE, EXP_EXP, EXP_POWER, POWER_POWER, SUBCRITICAL, SUPERCRITICAL, d1_sign_expr, dancso_G,
    dancso_G_form, focal_value_general, focal_value_normal_form, hopf_verdict, monomial_partials,
    scaled_partials, special_family_focal_sign, special_family_partials,
)
from glvstab.model import GlvSystem, ReducedSystem, to_dancso


def _sgn(v, tol=1e-9):
    return 0 if abs(v) < tol else (1 if v > 0 else -1)


@pytest.mark.parametrize("alpha", [-0.5, 0.3, 1.0, 1.5, 1.6])
def test_d1_on_hopf_line(alpha):
    beta = 2 - alpha
    assert d1_sign_expr(alpha - 1, -beta, -1, 1 - beta) == pytest.approx((alpha - 1) ** 2 * (alpha - 2), abs=1e-12)


def test_d1_examples():
    assert d1_sign_expr(-1, -2, -2, -1) == 0
    assert d1_sign_expr(0, 0.3, -0.7, 0) == 0


def test_dancso_G_examples():
    alpha, beta = 1.3, 0.4
    f = to_dancso(GlvSystem(alpha, 0, 1, beta, 0, 1))
    assert dancso_G_form(f) == pytest.approx(-beta * (1 - beta) * (alpha - 1), abs=1e-15)
    alpha = 1.4
    beta = 2 - alpha
    g = dancso_G(alpha, 1, 1, beta)
    assert g == pytest.approx(-beta * (alpha - 1) ** 2, abs=1e-15)
    assert np.sign(g) == np.sign((alpha - 1) ** 2 * (alpha - 2))
    assert dancso_G(0.3, 2.0, 0.0, 1.7) == 0


def _trace_zero_sample(rng, n):
    out = []
    while len(out) < n:
        a1, b1, a3, b3 = rng.uniform(-3, 3, 4)
        if a1 * b3 - b1 * a3 < 0 and a1 / b3 > 0:
            out.append((a1, b1, a3, b3))
    return out


def test_dancso_G_matches_d1(rng):
    # reduced exponents in the Dancso coordinates: p_hat = a1 - a3, q_hat = b3 - b1, p = -a3, q = -b1
    for a1, b1, a3, b3 in _trace_zero_sample(rng, 1000):
        g = dancso_G(a1 - a3, b3 - b1, -a3, -b1)
        assert g == pytest.approx(d1_sign_expr(a1, b1, a3, b3), rel=1e-10, abs=1e-12)


def test_scaled_general_formula_sign(rng):
    mismatches = 0
    for a1, b1, a3, b3 in _trace_zero_sample(rng, 1000):
        f, g = scaled_partials(a1, b1, a3, b3, a1 / b3)
        if _sgn(focal_value_general(f, g)) != _sgn(d1_sign_expr(a1, b1, a3, b3)):
            mismatches += 1
    assert mismatches == 0


def _cubic_field(rng):
    """Random cubic field with linear part ((0, -w), (w, 0)); partials at the origin."""
    w = rng.uniform(0.2, 3)
    f = np.zeros((4, 4))
    g = np.zeros((4, 4))
    f[0, 1], g[1, 0] = -w, w
    for i in range(4):
        for j in range(4 - i):
            if i + j >= 2:
                f[i, j], g[i, j] = rng.normal(size=2)
    return f, g, w


def test_general_reduces_to_normal_form(rng):
    for _ in range(500):
        f, g, w = _cubic_field(rng)
        a = focal_value_general(f, g)
        b = focal_value_normal_form(f, g, w)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-14)


def test_textbook_normal_form():
    # x' = -y, y' = x - y^3
    f = np.zeros((4, 4))
    g = np.zeros((4, 4))
    f[0, 1] = -1
    g[1, 0] = 1
    g[0, 3] = -6
    assert focal_value_normal_form(f, g, 1.0) == -3 / 8
    assert focal_value_general(f, g) == pytest.approx(-3 / 8, rel=1e-15)


def test_linear_field_has_zero_focal_value():
    f = np.zeros((4, 4))
    g = np.zeros((4, 4))
    f[1, 0], f[0, 1], g[1, 0], g[0, 1] = 0.5, -2.0, 1.0, -0.5
    assert focal_value_general(f, g) == 0


def test_general_requires_positive_det():
    f = np.zeros((4, 4))
    g = np.zeros((4, 4))
    f[1, 0], g[0, 1], g[1, 0] = 1.0, -1.0, 3.0  # J12 = 0, det = -1
    with pytest.raises(PreconditionError):
        focal_value_general(f, g)


def test_special_family_examples():
    assert special_family_focal_sign(POWER_POWER, 1, 1, 1, 2, 2, 1) == 0
    assert special_family_focal_sign(EXP_POWER, 1, 1, 1, 2, 1, 1) == -2
    assert special_family_focal_sign(EXP_EXP, 2, 1, 0.5, 1, 1, 1) == 0
    with pytest.raises(PreconditionError):
        special_family_focal_sign(POWER_POWER, 1, 1, 1, 2, 2, 2)  # trace != 0
    with pytest.raises(PreconditionError):
        special_family_focal_sign(EXP_POWER, 1, 1, 1, 0, 1, 1)  # det = -1
    with pytest.raises(ValidationError):
        special_family_focal_sign("Other", 1, 1, 1, 2, 1, 1)


def _family_sample(rng):
    while True:
        A = rng.uniform(0.2, 3) * rng.choice([-1, 1])
        a1, a2, b1 = rng.uniform(-3, 3, 3)
        B = rng.uniform(0.2, 3) * rng.choice([-1, 1])
        b2 = A * a1 / B
        if A * B * (-a1 * b2 + b1 * a2) > 0.05:
            return A, B, a1, a2, b1, b2


@pytest.mark.parametrize("family", [POWER_POWER, EXP_POWER, EXP_EXP])
def test_special_families_agree_with_general(rng, family):
    for _ in range(500):
        params = _family_sample(rng)
        f, g = special_family_partials(family, *params)
        D1 = focal_value_general(f, g)
        s = special_family_focal_sign(family, *params)
        if family == EXP_EXP:
            assert abs(D1) < 1e-9 * (1 + np.abs(f).max() + np.abs(g).max()) ** 3
        else:
            assert _sgn(D1) == _sgn(s)


def test_hopf_examples():
    r = hopf_verdict(GlvSystem.alpha_beta(1.5, 0.5))
    assert r.d1 == -0.125 and r.criticality == SUPERCRITICAL and r.D1 < 0
    assert hopf_verdict(ReducedSystem(-1, -2, -2, -1)).criticality == DEGENERATE
    assert hopf_verdict(GlvSystem(1, 0, 1, 1, 0, 1)).criticality == DEGENERATE


def test_hopf_subcritical():
    # a3 > 0 flips the sign of d1; trace zero via rates k2 = b3, k3 = a1 with x* = y* = 1
    a1, b1, a3, b3 = 1.0, 1.0, 2.0, 1.5
    assert a1 * b3 - b1 * a3 < 0
    r = ReducedSystem(a1, b1, a3, b3, k1=b3, k2=b3, k3=a1, k4=a1)
    rep = hopf_verdict(r)
    assert rep.d1 > 0 and rep.criticality == SUBCRITICAL and rep.D1 > 0


def test_hopf_general_rates(rng):
    for a1, b1, a3, b3 in _trace_zero_sample(rng, 300):
        k2, k3 = abs(b3), abs(a1)
        r = ReducedSystem(a1, b1, a3, b3, k1=k2, k2=k2, k3=k3, k4=k3)
        rep = hopf_verdict(r)
        assert _sgn(rep.D1) == _sgn(rep.d1)


def test_hopf_preconditions():
    with pytest.raises(PreconditionError):
        hopf_verdict(ReducedSystem(1, 0.5, -0.5, 1))  # det C > 0
    with pytest.raises(PreconditionError):
        hopf_verdict(ReducedSystem(-1, -1, -1, 1))  # trace < 0


def test_monomial_partials():
    d = monomial_partials(2.0, 1.5, -0.5, 2.0, 3.0)
    assert d[1, 1] == pytest.approx(2 * 1.5 * -0.5 * 2 ** 0.5 * 3 ** -1.5)
    assert d[0, 3] == pytest.approx(2 * (-0.5) * (-1.5) * (-2.5) * 2 ** 1.5 * 3 ** -3.5)
