import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_exponents(rng, n, lo=-3.0, hi=3.0, min_abs_det=0.1):
    """n rows (a1, b1, a3, b3) with |det C| >= min_abs_det."""
    out = []
    while len(out) < n:
        a1, b1, a3, b3 = rng.uniform(lo, hi, 4)
        if abs(a1 * b3 - b1 * a3) >= min_abs_det:
            out.append((a1, b1, a3, b3))
    return np.array(out)
