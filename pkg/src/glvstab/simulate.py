"""Positivity-preserving simulation with event detection.

Integration runs in log coordinates (u, v) = (ln x, ln y), where

    u' = x'/x,   v' = y'/y

are sums of exponentials of affine forms in (u, v). Every sample is therefore
strictly positive. The stepper is the Dormand-Prince 5(4) embedded pair with
FSAL and a standard PI-free step controller.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

import numpy as np

from .equilibrium import UNIQUE, solve_equilibrium
from .errors import DomainError
from .model import ReducedSystem, as_reduced

CONVERGED = "Converged"
PERIODIC = "PeriodicOrbit"
BOUNDARY = "BoundaryApproach"
BLOWUP = "BlowUp"
HORIZON = "HorizonReached"
STIFF = "StiffFailure"

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


@dataclass(frozen=True)
class SimConfig:
    t_max: float = 1000.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    convergence_radius: float = 1e-8
    boundary_log_threshold: float = math.log(1e-6)
    blowup_log_threshold: float = -math.log(1e-6)
    periodic_tol: float = 1e-6
    trend_steps: int = 10
    max_steps: int = 2_000_000
    detect_periodic: bool = True

    def __post_init__(self):
        for name in ("t_max", "rel_tol", "abs_tol", "convergence_radius", "periodic_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (math.isfinite(self.boundary_log_threshold) and math.isfinite(self.blowup_log_threshold)):
            raise ValueError("thresholds must be finite")


@dataclass
class Trajectory:
    samples: np.ndarray  # (n, 3): t, x, y
    terminal: dict
    crossings: list = field(default_factory=list)  # (t, x) on the Poincare section

    @property
    def kind(self):
        return self.terminal["kind"]

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def x(self):
        return self.samples[:, 1]

    @property
    def y(self):
        return self.samples[:, 2]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        for t, x, y in self.samples:
            w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
        return buf.getvalue()

    def sidecar(self):
        return json.dumps({"terminal": self.terminal, "samples": int(len(self.samples))}, indent=2)


def log_field(sys):
    """Closure (u, v) -> (u', v') using plain floats for speed."""
    if isinstance(sys, ReducedSystem):
        e = (sys.a1, sys.b1, 0.0, 0.0, sys.a3, sys.b3)
    else:
        e = sys.exponents
    al1, be1, al2, be2, al3, be3 = e
    k1, k2, k3, k4 = sys.rates
    exp = math.exp
    a11, a12 = al1 - 1.0, be1
    a21, a22 = al2 - 1.0, be2
    b21, b22 = al2, be2 - 1.0
    b31, b32 = al3, be3 - 1.0

    def rhs(u, v):
        return (
            k1 * exp(a11 * u + a12 * v) - k2 * exp(a21 * u + a22 * v),
            k3 * exp(b21 * u + b22 * v) - k4 * exp(b31 * u + b32 * v),
        )

    return rhs


def _hermite(theta, h, y0, f0, y1, f1):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _section_crossing(h, s0, s1, u0, fu0, u1, fu1, v0, fv0, v1, fv1, v_star):
    """Root of v(theta) = v* on [0, 1] by bisection on the cubic Hermite interpolant."""
    lo, hi = 0.0, 1.0
    slo = s0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        sm = _hermite(mid, h, v0, fv0, v1, fv1) - v_star
        if (sm < 0) == (slo < 0) and sm != 0:
            lo, slo = mid, sm
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return theta, _hermite(theta, h, u0, fu0, u1, fu1)


class _Stepper:
    def __init__(self, rhs, rtol, atol):
        self.rhs = rhs
        self.rtol = rtol
        self.atol = atol

    def attempt(self, u, v, fu, fv, h):
        rhs = self.rhs
        ku = [fu, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        kv = [fv, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        for s in range(1, 7):
            row = _A[s]
            du = dv = 0.0
            for j, a in enumerate(row):
                du += a * ku[j]
                dv += a * kv[j]
            ku[s], kv[s] = rhs(u + h * du, v + h * dv)
        a7 = _A[6]
        un = u + h * sum(a * k for a, k in zip(a7, ku))
        vn = v + h * sum(a * k for a, k in zip(a7, kv))
        eu = h * sum(e * k for e, k in zip(_E, ku))
        ev = h * sum(e * k for e, k in zip(_E, kv))
        su = self.atol + self.rtol * max(abs(u), abs(un))
        sv = self.atol + self.rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        return un, vn, ku[6], kv[6], err


def _initial_step(u, v, fu, fv, rtol, atol):
    su = atol + rtol * abs(u)
    sv = atol + rtol * abs(v)
    d0 = math.hypot(u / su, v / sv) / math.sqrt(2)
    d1 = math.hypot(fu / su, fv / sv) / math.sqrt(2)
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return min(0.01 * d0 / d1, 1.0)


def integrate(sys, x0, y0, cfg: Optional[SimConfig] = None) -> Trajectory:
    """Integrate from (x0, y0) until an event fires or t_max is reached."""
    if not (x0 > 0 and y0 > 0):
        raise DomainError("initial state must be positive")
    cfg = cfg or SimConfig()
    eq = solve_equilibrium(as_reduced(sys))
    has_eq = eq.kind == UNIQUE
    us, vs = (eq.u, eq.v) if has_eq else (0.0, 0.0)

    rhs = log_field(sys)
    stepper = _Stepper(rhs, cfg.rel_tol, cfg.abs_tol)
    u, v = math.log(x0), math.log(y0)
    t = 0.0
    fu, fv = rhs(u, v)
    ts, xs, ys = [t], [x0], [y0]
    dists = [math.hypot(u - us, v - vs)]
    crossings = []
    cross_dir = 0
    trend = 0

    def finish(terminal):
        samples = np.column_stack([ts, xs, ys])
        return Trajectory(samples, terminal, crossings)

    if has_eq and dists[0] < cfg.convergence_radius:
        return finish({"kind": CONVERGED, "t": 0.0, "distance": dists[0]})

    h = _initial_step(u, v, fu, fv, cfg.rel_tol, cfg.abs_tol)
    steps = 0
    while t < cfg.t_max:
        steps += 1
        if steps > cfg.max_steps:
            return finish({"kind": STIFF, "reason": "step limit", "t": t})
        h = min(h, cfg.t_max - t)
        try:
            un, vn, fun, fvn, err = stepper.attempt(u, v, fu, fv, h)
            ok = math.isfinite(err)
        except OverflowError:
            ok = False
        if not ok:
            h *= 0.25
            if h < 1e-14 * max(1.0, t):
                return finish({"kind": STIFF, "reason": "step-size underflow", "t": t})
            continue
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14 * max(1.0, t):
                return finish({"kind": STIFF, "reason": "step-size underflow", "t": t})
            continue

        tn = t + h
        if cfg.detect_periodic and has_eq:
            s0, s1 = v - vs, vn - vs
            if s0 != 0 and (s1 == 0 or (s0 < 0) != (s1 < 0)):
                theta, uc = _section_crossing(h, s0, s1, u, fu, un, fun, v, fv, vn, fvn, vs)
                direction = 1 if s1 > s0 else -1
                if uc > us and (cross_dir == 0 or direction == cross_dir):
                    cross_dir = direction
                    crossings.append((t + theta * h, uc, len(ts)))

        t, u, v, fu, fv = tn, un, vn, fun, fvn
        x, y = math.exp(u), math.exp(v)
        ts.append(t)
        xs.append(x)
        ys.append(y)
        d = math.hypot(u - us, v - vs)
        # spirals wobble in distance from step to step, so the trend is windowed:
        # count consecutive steps that sit inside the radius and below the value
        # trend_steps samples earlier
        back = dists[-cfg.trend_steps] if len(dists) >= cfg.trend_steps else dists[0]
        trend = trend + 1 if (d < cfg.convergence_radius and d <= back) else 0
        dists.append(d)
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0 else 5.0

        du, dv = u - us, v - vs
        if du < cfg.boundary_log_threshold:
            return finish({"kind": BOUNDARY, "axis": "y", "t": t, "point": [x, y]})
        if dv < cfg.boundary_log_threshold:
            return finish({"kind": BOUNDARY, "axis": "x", "t": t, "point": [x, y]})
        if du > cfg.blowup_log_threshold or dv > cfg.blowup_log_threshold:
            direction = "x" if du > cfg.blowup_log_threshold else "y"
            return finish({"kind": BLOWUP, "direction": direction, "t": t, "point": [x, y]})
        if has_eq and d < cfg.convergence_radius and trend >= cfg.trend_steps:
            return finish({"kind": CONVERGED, "t": t, "distance": d})
        if len(crossings) >= 3 and crossings[-1][2] == len(ts) - 1:
            found = poincare_periodicity(crossings, dists, us, cfg)
            if found is not None:
                found.update(kind=PERIODIC, t=t)
                return finish(found)

    return finish({"kind": HORIZON, "t": t, "point": [xs[-1], ys[-1]], "distance": dists[-1]})


def poincare_periodicity(crossings, dists, u_star, cfg: SimConfig):
    """Closed orbit test on the section y = y*, x > x*.

    crossings: (t, u, sample index) of successive same-direction crossings.
    dists: log-distance to the equilibrium at each sample.
    u_star: ln x* of the equilibrium.
    """
    if len(crossings) < 3:
        return None
    (t1, u1, _), (t2, u2, i2), (t3, u3, i3) = crossings[-3:]
    # the absolute test alone accepts slowly contracting spirals once they are small,
    # so the change per loop must also be small relative to the section offset
    tol = cfg.periodic_tol * min(1.0, abs(u3 - u_star))
    if abs(u3 - u2) >= tol or abs(u2 - u1) >= tol:
        return None
    loop = dists[i2:i3 + 1]
    amplitude = max(loop)
    if min(loop) <= 10 * cfg.convergence_radius:
        return None
    return {
        "period": t3 - t2,
        "previous_period": t2 - t1,
        "amplitude": amplitude,
        "section_x": math.exp(u3),
    }


def conserve_check(traj: Trajectory, quantity: Callable) -> float:
    """Max relative drift of quantity(x, y) along the trajectory."""
    q = np.asarray(quantity(traj.x, traj.y), dtype=float)
    if q.ndim == 0:
        return 0.0
    q0 = q[0]
    return float(np.max(np.abs(q - q0)) / max(1.0, abs(q0)))


def _run(job):
    sys, x0, y0, cfg = job
    return integrate(sys, x0, y0, cfg)


def integrate_batch(jobs, executor: Optional[Executor] = None):
    """Run (sys, x0, y0, cfg) jobs; results come back in job order."""
    if executor is None:
        return [_run(job) for job in jobs]
    return list(executor.map(_run, jobs))


def config_dict(cfg: SimConfig):
    return asdict(cfg)
