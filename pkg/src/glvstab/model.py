"""Power-law Lotka scheme: six-exponent form, reduced form, Dancso form.

The full system reads

    x' = k1 x^alpha1 y^beta1 - k2 x^alpha2 y^beta2
    y' = k3 x^alpha2 y^beta2 - k4 x^alpha3 y^beta3

and is orbitally equivalent on the open positive quadrant to the reduced system

    x' = k1 x^a1 y^b1 - k2
    y' = k3 - k4 x^a3 y^b3

with a1 = alpha1 - alpha2, b1 = beta1 - beta2, a3 = alpha3 - alpha2, b3 = beta3 - beta2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

RATE_NAMES = ("k1", "k2", "k3", "k4")


def _check_rates(obj):
    for name in RATE_NAMES:
        k = getattr(obj, name)
        if not (math.isfinite(k) and k > 0):
            raise ValidationError(f"rate {name} must be a positive finite number, got {k!r}")


def _check_finite(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v):
            raise ValidationError(f"exponent {name} must be finite, got {v!r}")


def monomial(x, y, a, b):
    """x**a * y**b on the positive quadrant, evaluated as exp(a ln x + b ln y)."""
    return np.exp(a * np.log(x) + b * np.log(y))


def _check_state(x, y):
    if np.any(np.asarray(x) <= 0) or np.any(np.asarray(y) <= 0):
        raise DomainError("state must lie in the open positive quadrant (x > 0, y > 0)")


@dataclass(frozen=True)
class GlvSystem:
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    alpha3: float
    beta3: float
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0

    EXPONENTS = ("alpha1", "beta1", "alpha2", "beta2", "alpha3", "beta3")

    def __post_init__(self):
        for name in self.EXPONENTS + RATE_NAMES:
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite(self, self.EXPONENTS)
        _check_rates(self)

    @classmethod
    def alpha_beta(cls, alpha, beta, rates=(1.0, 1.0, 1.0, 1.0)):
        """The two-exponent family x' = k1 x^alpha - k2 x y^beta, y' = k3 x y^beta - k4 y."""
        return cls(alpha, 0.0, 1.0, beta, 0.0, 1.0, *rates)

    @property
    def rates(self):
        return (self.k1, self.k2, self.k3, self.k4)

    @property
    def exponents(self):
        return tuple(getattr(self, name) for name in self.EXPONENTS)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.EXPONENTS + RATE_NAMES}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**{name: d[name] for name in cls.EXPONENTS + RATE_NAMES})
        except KeyError as exc:
            raise ValidationError(f"missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class ReducedSystem:
    a1: float
    b1: float
    a3: float
    b3: float
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0
    det_c: float = field(init=False)

    EXPONENTS = ("a1", "b1", "a3", "b3")

    def __post_init__(self):
        for name in self.EXPONENTS + RATE_NAMES:
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite(self, self.EXPONENTS)
        _check_rates(self)
        object.__setattr__(self, "det_c", self.a1 * self.b3 - self.b1 * self.a3)

    @property
    def rates(self):
        return (self.k1, self.k2, self.k3, self.k4)

    @property
    def exponents(self):
        return (self.a1, self.b1, self.a3, self.b3)

    @property
    def matrix(self):
        return np.array([[self.a1, self.b1], [self.a3, self.b3]])

    def with_rates(self, k1, k2, k3, k4):
        return ReducedSystem(self.a1, self.b1, self.a3, self.b3, k1, k2, k3, k4)

    def to_dict(self):
        d = {name: getattr(self, name) for name in self.EXPONENTS + RATE_NAMES}
        d["detC"] = self.det_c
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**{name: d[name] for name in cls.EXPONENTS + RATE_NAMES})
        except KeyError as exc:
            raise ValidationError(f"missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class DancsoForm:
    """x' = k1 x^p_hat - k2 x^p y^q,  y' = k3 x^p y^q - k4 y^q_hat."""

    p_hat: float
    q_hat: float
    p: float
    q: float
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0

    def __post_init__(self):
        _check_finite(self, ("p_hat", "q_hat", "p", "q"))
        _check_rates(self)


def reduce(sys: GlvSystem) -> ReducedSystem:
    return ReducedSystem(
        sys.alpha1 - sys.alpha2,
        sys.beta1 - sys.beta2,
        sys.alpha3 - sys.alpha2,
        sys.beta3 - sys.beta2,
        *sys.rates,
    )


def as_reduced(sys) -> ReducedSystem:
    if isinstance(sys, ReducedSystem):
        return sys
    return reduce(sys)


def to_dancso(sys: GlvSystem) -> DancsoForm:
    return DancsoForm(
        sys.alpha1 - sys.alpha3,
        sys.beta3 - sys.beta1,
        sys.alpha2 - sys.alpha3,
        sys.beta2 - sys.beta1,
        *sys.rates,
    )


def eval_field(sys, x, y):
    """Right-hand side (x', y') of either form. Accepts scalars or arrays."""
    _check_state(x, y)
    if isinstance(sys, ReducedSystem):
        dx = sys.k1 * monomial(x, y, sys.a1, sys.b1) - sys.k2
        dy = sys.k3 - sys.k4 * monomial(x, y, sys.a3, sys.b3)
    else:
        m2 = monomial(x, y, sys.alpha2, sys.beta2)
        dx = sys.k1 * monomial(x, y, sys.alpha1, sys.beta1) - sys.k2 * m2
        dy = sys.k3 * m2 - sys.k4 * monomial(x, y, sys.alpha3, sys.beta3)
    if np.ndim(dx) == 0:
        return float(dx), float(dy)
    return dx, dy


def time_scale(sys, x, y):
    """Positive factor by which the full field exceeds the reduced one (1 for reduced systems)."""
    if isinstance(sys, ReducedSystem):
        return 1.0
    return float(monomial(x, y, sys.alpha2, sys.beta2))
