import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glvstab.equilibrium import EMPTY, INFINITE, UNIQUE, equilibrium_point, solve_equilibrium
from glvstab.model import ReducedSystem, monomial

from conftest import random_exponents


def test_unit_rates_give_one():
    for e in [(-1, 0.5, 2, 1), (3, -1, 0.2, 0.7)]:
        r = ReducedSystem(*e, 2.5, 2.5, 0.3, 0.3)
        assert equilibrium_point(r) == (1.0, 1.0)


def test_worked_example():
    x, y = equilibrium_point(ReducedSystem(-1, 0, 0, 1, 1, 2, 3, 4))
    assert x == pytest.approx(0.5, rel=1e-15) and y == pytest.approx(0.75, rel=1e-15)


def test_llibre():
    e = solve_equilibrium(ReducedSystem(-1, -2, -2, -1))
    assert e.kind == UNIQUE and e.point == (1.0, 1.0) and e.det_c == -3


def test_zip_cases():
    # C = ((1, 1), (2, 2)): image spanned by (1, 2)
    assert solve_equilibrium(ReducedSystem(1, 1, 2, 2, 1, math.e, 1, math.exp(-2))).kind == INFINITE
    assert solve_equilibrium(ReducedSystem(1, 1, 2, 2, 1, math.e, 1, 1)).kind == EMPTY
    assert solve_equilibrium(ReducedSystem(0, 0, 0, 0)).kind == INFINITE
    assert solve_equilibrium(ReducedSystem(0, 0, 0, 0, 1, 2, 1, 1)).kind == EMPTY
    assert equilibrium_point(ReducedSystem(0, 0, 0, 0)) is None


def _newton(c, rhs, iters=20):
    z = np.zeros(2)
    for _ in range(iters):
        step = np.linalg.solve(c, c @ z - rhs)
        z = z - step
        if np.max(np.abs(step)) <= 1e-15 * (1 + np.max(np.abs(z))):
            break
    return z


def test_residual_and_newton_oracle(rng):
    exps = random_exponents(rng, 10_000)
    logk = rng.uniform(-3, 3, (10_000, 4))
    worst_res = worst_newton = 0.0
    for e, lk in zip(exps, logk):
        k = np.exp(lk)
        r = ReducedSystem(*e, *k)
        res = solve_equilibrium(r)
        assert res.kind == UNIQUE
        # residual in log form avoids overflow of x*, y* for extreme samples
        r1 = math.expm1(math.log(r.k1) + r.a1 * res.u + r.b1 * res.v - math.log(r.k2))
        r2 = math.expm1(math.log(r.k4) + r.a3 * res.u + r.b3 * res.v - math.log(r.k3))
        worst_res = max(worst_res, abs(r1), abs(r2))
        z = _newton(r.matrix, np.array([lk[1] - lk[0], lk[2] - lk[3]]))
        worst_newton = max(worst_newton, abs(math.expm1(res.u - z[0])), abs(math.expm1(res.v - z[1])))
    assert worst_res <= 1e-10
    assert worst_newton <= 1e-8


@settings(max_examples=300, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
       st.lists(st.floats(0.05, 20), min_size=4, max_size=4))
def test_unique_iff_det_nonzero(a1, b1, a3, b3, k):
    r = ReducedSystem(a1, b1, a3, b3, *k)
    res = solve_equilibrium(r)
    assert (res.kind == UNIQUE) == (r.det_c != 0)
    if res.kind == UNIQUE:
        assert math.isfinite(res.u) or abs(r.det_c) < 1e-300
    if res.kind == UNIQUE and abs(r.det_c) > 1e-3:
        # log form: x* or y* may lie outside the float range for small detC
        lhs = a1 * res.u + b1 * res.v
        rhs = math.log(k[1] / k[0])
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(a1 * res.u), abs(b1 * res.v))
