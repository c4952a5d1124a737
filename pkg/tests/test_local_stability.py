import math

import numpy as np
import pytest

from glvstab.equilibrium import solve_equilibrium
from glvstab.errors import PreconditionError, ZipCaseError
from glvstab.local_stability import (
    ASYMPTOTICALLY_STABLE, CENTER, INCONCLUSIVE, SADDLE, STABLE_FOCUS, STABLE_NODE, UNSTABLE,
    UNSTABLE_FOCUS, UNSTABLE_NODE, classify_matrix, eigenvalues, jacobian, linear_verdict,
)
from glvstab.model import GlvSystem, ReducedSystem, eval_field, reduce

from conftest import random_exponents


def _jac(sys):
    e = solve_equilibrium(sys)
    return jacobian(sys, (e.x, e.y))


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (1.5, 0.5), (0.5, 1.5), (2.0, 2.0), (1.25, 0.8)])
def test_alpha_beta_jacobian(alpha, beta):
    rep = _jac(GlvSystem.alpha_beta(alpha, beta))
    assert np.array_equal(rep.J, [[alpha - 1, -beta], [1, beta - 1]])
    assert rep.prefactor == 1.0


def test_llibre_jacobian():
    rep = _jac(ReducedSystem(-1, -2, -2, -1))
    assert np.array_equal(rep.J, [[-1, -2], [2, 1]])
    assert rep.trace == 0 and rep.det == 3
    assert rep.eigen_class == CENTER
    assert linear_verdict(rep) == INCONCLUSIVE


def test_classical_center():
    rep = _jac(GlvSystem(1, 0, 1, 1, 0, 1))
    assert np.array_equal(rep.J, [[0, -1], [1, 0]])
    assert rep.eigen_class == CENTER
    assert eigenvalues(rep) == (complex(0, -1), complex(0, 1))


def test_linear_verdicts():
    assert linear_verdict(_jac(ReducedSystem(-1, -1, -1, 1))) == ASYMPTOTICALLY_STABLE
    saddle = _jac(ReducedSystem(1, 0.5, -0.5, 1))
    assert saddle.det_c > 0 and saddle.eigen_class == SADDLE
    assert linear_verdict(saddle) == UNSTABLE
    assert linear_verdict(_jac(GlvSystem.alpha_beta(2, 2))) == UNSTABLE


@pytest.mark.parametrize(
    "tr,det,expected",
    [(-3, 1, STABLE_NODE), (-1, 1, STABLE_FOCUS), (1, 1, UNSTABLE_FOCUS), (3, 1, UNSTABLE_NODE), (0.5, -1, SADDLE)],
)
def test_classify_matrix(tr, det, expected):
    assert classify_matrix(tr, det, False) == expected


def test_precondition_errors():
    with pytest.raises(ZipCaseError):
        jacobian(ReducedSystem(1, 1, 1, 1), (1, 1))
    with pytest.raises(PreconditionError):
        jacobian(ReducedSystem(-1, 0, 0, 1, 1, 2, 3, 4), (1.0, 1.0))
    with pytest.raises(PreconditionError):
        jacobian(ReducedSystem(-1, 0, 0, 1), (-1.0, 1.0))


def _random_systems(rng, n):
    exps = random_exponents(rng, n, -2, 2)
    out = []
    for e in exps:
        a2, b2 = rng.uniform(-2, 2, 2)
        k = np.exp(rng.uniform(-1, 1, 4))
        a1, b1, a3, b3 = e
        out.append(GlvSystem(a1 + a2, b1 + b2, a2, b2, a3 + a2, b3 + b2, *k))
    return out


def test_sign_identities(rng):
    for s in _random_systems(rng, 10_000):
        r = reduce(s)
        e = solve_equilibrium(r)
        rep = jacobian(s, (e.x, e.y))
        assert np.sign(rep.det) == -np.sign(r.det_c)
        assert np.sign(rep.trace) == np.sign(r.a1 * r.k2 / e.x - r.b3 * r.k3 / e.y)


def test_finite_differences(rng):
    worst = 0.0
    for s in _random_systems(rng, 1000):
        e = solve_equilibrium(s)
        x, y = e.x, e.y
        if not (1e-100 < x < 1e100 and 1e-100 < y < 1e100):
            continue
        rep = jacobian(s, (x, y))
        hx, hy = 1e-6 * x, 1e-6 * y
        fd = np.empty((2, 2))
        fd[:, 0] = (np.array(eval_field(s, x + hx, y)) - np.array(eval_field(s, x - hx, y))) / (2 * hx)
        fd[:, 1] = (np.array(eval_field(s, x, y + hy)) - np.array(eval_field(s, x, y - hy))) / (2 * hy)
        # columns carry different units (1/x*, 1/y*), so each column is compared at its own scale
        for j in range(2):
            scale = np.max(np.abs(rep.J[:, j]))
            worst = max(worst, float(np.max(np.abs(fd[:, j] - rep.J[:, j])) / scale))
    assert worst <= 1e-5
