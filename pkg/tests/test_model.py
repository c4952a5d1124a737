import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glvstab.errors import DomainError, ValidationError
from glvstab.model import DancsoForm, GlvSystem, ReducedSystem, eval_field, reduce, to_dancso

finite = st.floats(-4, 4, allow_nan=False)
rate = st.floats(0.05, 20, allow_nan=False)
CLASSICAL = GlvSystem(1, 0, 1, 1, 0, 1)


def test_reduce_classical():
    r = reduce(CLASSICAL)
    assert (r.a1, r.b1, r.a3, r.b3) == (0, -1, -1, 0)
    assert r.det_c == -1
    assert r.rates == CLASSICAL.rates


@pytest.mark.parametrize("alpha,beta", [(0.5, 1.5), (1.25, 0.8), (-1.0, 2.0)])
def test_reduce_alpha_beta(alpha, beta):
    r = reduce(GlvSystem(alpha, 0, 1, beta, 0, 1))
    assert (r.a1, r.b1, r.a3, r.b3) == (alpha - 1, -beta, -1, 1 - beta)


def test_reduce_equal_exponents_is_zip():
    r = reduce(GlvSystem(0.7, 0.7, 0.7, 0.7, 0.7, 0.7))
    assert r.exponents == (0, 0, 0, 0) and r.det_c == 0


def test_to_dancso():
    d = to_dancso(GlvSystem(1.3, 0, 1, 0.4, 0, 1))
    assert (d.p_hat, d.q_hat, d.p, d.q) == (1.3, 1, 1, 0.4)
    d = to_dancso(CLASSICAL)
    assert (d.p_hat, d.q_hat, d.p, d.q) == (1, 1, 1, 1)
    d = to_dancso(GlvSystem(0, 0, 0, 0, 0, 0))
    assert (d.p_hat, d.q_hat, d.p, d.q) == (0, 0, 0, 0)


def test_eval_field_examples():
    assert eval_field(ReducedSystem(-1, 0, 0, 1, 1, 2, 3, 4), 1, 1) == (-1, -1)
    assert eval_field(CLASSICAL, 2, 1) == (0, 1)


def test_eval_field_zero_at_equilibrium():
    from glvstab.equilibrium import solve_equilibrium

    r = ReducedSystem(-1.3, 0.4, 0.7, 2.1, 0.5, 3.0, 1.7, 0.2)
    e = solve_equilibrium(r)
    fx, fy = eval_field(r, e.x, e.y)
    assert abs(fx) <= 1e-12 * r.k2 and abs(fy) <= 1e-12 * r.k3


@pytest.mark.parametrize("x,y", [(0, 1), (1, 0), (-1, 2), (2, -0.5)])
def test_eval_field_domain(x, y):
    with pytest.raises(DomainError):
        eval_field(CLASSICAL, x, y)


@pytest.mark.parametrize("k", [0.0, -1.0, math.inf, math.nan])
def test_rates_must_be_positive(k):
    with pytest.raises(ValidationError):
        GlvSystem(1, 0, 1, 1, 0, 1, k1=k)
    with pytest.raises(ValidationError):
        ReducedSystem(0, -1, -1, 0, 1, 1, k, 1)


def test_exponents_must_be_finite():
    with pytest.raises(ValidationError):
        GlvSystem(math.inf, 0, 1, 1, 0, 1)
    with pytest.raises(ValidationError):
        DancsoForm(math.nan, 0, 0, 0)


def test_json_roundtrip():
    s = GlvSystem(1.5, -0.25, 1, 0.5, 0, 1, 2, 3, 4, 5)
    assert GlvSystem.from_dict(json.loads(json.dumps(s.to_dict()))) == s
    r = reduce(s)
    d = json.loads(json.dumps(r.to_dict()))
    assert d["detC"] == r.det_c
    assert ReducedSystem.from_dict(d) == r


def test_orbital_equivalence(rng):
    """Full field = x^alpha2 y^beta2 times the reduced field, 1e-12 relative, 10^4 samples."""
    worst = 0.0
    for _ in range(10_000):
        e = rng.uniform(-2, 2, 6)
        k = np.exp(rng.uniform(-2, 2, 4))
        s = GlvSystem(*e, *k)
        x, y = np.exp(rng.uniform(-2, 2, 2))
        full = np.array(eval_field(s, x, y))
        red = np.array(eval_field(reduce(s), x, y))
        pre = x ** s.alpha2 * y ** s.beta2
        # scale: magnitude of the two monomials in each component, so cancellation is not penalized
        scale = np.array([
            s.k1 * x ** s.alpha1 * y ** s.beta1 + s.k2 * x ** s.alpha2 * y ** s.beta2,
            s.k3 * x ** s.alpha2 * y ** s.beta2 + s.k4 * x ** s.alpha3 * y ** s.beta3,
        ])
        worst = max(worst, float(np.max(np.abs(full - pre * red) / scale)))
    assert worst <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=6, max_size=6), finite, finite)
def test_reduce_shift_invariant(e, da, db):
    a1, b1, a2, b2, a3, b3 = e
    s = GlvSystem(a1, b1, a2, b2, a3, b3)
    t = GlvSystem(a1 + da, b1 + db, a2 + da, b2 + db, a3 + da, b3 + db)
    r, q = reduce(s), reduce(t)
    for u, v in zip(r.exponents, q.exponents):
        assert u == pytest.approx(v, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_det_c_exact(a1, b1, a3, b3):
    assert ReducedSystem(a1, b1, a3, b3).det_c == a1 * b3 - b1 * a3


def test_immutable():
    with pytest.raises(Exception):
        CLASSICAL.k1 = 2.0
