"""Command-line front end.

Systems are given as ``--exponents a1,b1,a3,b3 [--rates k1,k2,k3,k4]``,
``--alpha A --beta B`` for the (alpha, beta) family, or a ``.glv`` network file.

Exit codes: 0 success, 1 parse or validation error, 2 precondition not met,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import certificates as cert
from . import classify as cls
from .equilibrium import solve_equilibrium, UNIQUE
from .errors import GlvError, NumericalFailure, PreconditionError, ValidationError
from .focal import hopf_verdict
from .local_stability import eigenvalues, jacobian, linear_verdict
from .model import GlvSystem, ReducedSystem, as_reduced
from .network import load_network, lower
from .portrait import PRESETS, diagram_svg, portrait, portraits_csv, portraits_svg, preset
from .simulate import STIFF, SimConfig, integrate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _floats(text, n, what):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ValidationError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ValidationError(f"{what}: expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _decimal(text, what):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{what}: not a decimal number: {text!r}") from None


def _add_system_args(p):
    p.add_argument("file", nargs="?", help=".glv network file")
    p.add_argument("--exponents", metavar="a1,b1,a3,b3", help="reduced exponents")
    p.add_argument("--rates", metavar="k1,k2,k3,k4", help="rate constants (default all 1)")
    p.add_argument("--alpha", help="alpha of the (alpha, beta) family (exact decimal)")
    p.add_argument("--beta", help="beta of the (alpha, beta) family (exact decimal)")


def _is_alpha_beta(args):
    if (args.alpha is None) != (args.beta is None):
        raise ValidationError("--alpha and --beta must be given together")
    return args.alpha is not None


def _system(args):
    sources = sum([args.file is not None, args.exponents is not None, args.alpha is not None or args.beta is not None])
    if sources != 1:
        raise ValidationError("give exactly one of FILE, --exponents, or --alpha/--beta")
    if args.file is not None:
        if args.rates is not None:
            raise ValidationError("--rates cannot be combined with a network file")
        return lower(load_network(args.file))
    rates = _floats(args.rates, 4, "--rates") if args.rates else (1.0, 1.0, 1.0, 1.0)
    if _is_alpha_beta(args):
        a = _decimal(args.alpha, "--alpha")
        b = _decimal(args.beta, "--beta")
        return GlvSystem.alpha_beta(float(a), float(b), rates)
    a1, b1, a3, b3 = _floats(args.exponents, 4, "--exponents")
    return ReducedSystem(a1, b1, a3, b3, *rates)


def _dump(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands


def cmd_parse(args):
    net = load_network(args.file)
    _dump(lower(net).to_dict())


def cmd_classify(args):
    if args.file is None and args.exponents is None and args.alpha is not None:
        if args.rates is not None:
            raise ValidationError("the (alpha, beta) family has all rates 1; drop --rates")
        _is_alpha_beta(args)
        v = cls.classify_alpha_beta(_decimal(args.alpha, "--alpha"), _decimal(args.beta, "--beta"), certify=not args.no_certify)
        _dump(v.to_dict())
        return
    system = _system(args)
    if args.all_k or args.stoichiometric is not None:
        red = as_reduced(system)
        n = args.stoichiometric
        v = cls.classify_all_k_global(red.exponents, stoichiometric_n=n, certify=not args.no_certify)
    else:
        v = cls.classify_system(system, certify=not args.no_certify)
    _dump(v.to_dict())


def cmd_equilibrium(args):
    _dump(solve_equilibrium(_system(args)).to_dict())


def _equilibrium_point(system):
    eq = solve_equilibrium(system)
    if eq.kind != UNIQUE:
        raise PreconditionError(f"no unique positive equilibrium ({eq.kind})")
    return eq


def cmd_jacobian(args):
    system = _system(args)
    eq = _equilibrium_point(system)
    rep = jacobian(system, (eq.x, eq.y))
    d = rep.to_dict()
    d["equilibrium"] = [eq.x, eq.y]
    d["eigenvalues"] = [[z.real, z.imag] for z in eigenvalues(rep)]
    d["linear_verdict"] = linear_verdict(rep)
    _dump(d)


def cmd_focal(args):
    _dump(hopf_verdict(_system(args)).to_dict())


def cmd_certify(args):
    system = _system(args)
    kind = args.kind
    hw = math.log(args.box_factor)
    if kind == "dulac":
        if args.alpha is not None:
            a, b = float(_decimal(args.alpha, "--alpha")), float(_decimal(args.beta, "--beta"))
            if a > 1:
                c = cert.dulac_triangle(a, b, hw, args.grid)
                _dump(c.to_dict())
                return
        c = cert.dulac_generic(system, args.p, args.q, hw, args.grid)
        d = c.to_dict()
    elif kind == "integral":
        red = as_reduced(system)
        d = cert.first_integral(red).to_dict()
        if (red.a1 == 0) != (red.b3 == 0):
            d["lyapunov"] = cert.lyapunov_derivative_sign(red, half_width=hw, n=args.grid)
        elif not (red.a1 == 0 and red.b3 == 0):
            raise PreconditionError("first integral / Lyapunov function needs a1 = 0 or b3 = 0")
    elif kind == "invariant-set":
        d = cert.invariant_set(system, args.lemma).to_dict()
    else:
        d = cert.boundary_curve(system).to_dict()
    _dump(d)


def cmd_simulate(args):
    system = _system(args)
    cfg = SimConfig(
        t_max=args.tmax,
        rel_tol=args.rtol,
        abs_tol=args.atol,
        detect_periodic=not args.no_periodic,
    )
    tr = integrate(system, args.x0, args.y0, cfg)
    if args.out:
        _write(args.out, tr.to_csv())
        _write(args.out + ".json", tr.sidecar() + "\n")
    else:
        sys.stdout.write(tr.to_csv())
    sys.stderr.write(json.dumps(tr.terminal) + "\n")
    if tr.kind == STIFF:
        raise NumericalFailure(f"integration failed: {tr.terminal.get('reason')}")


def cmd_portrait(args):
    if args.preset:
        if args.file or args.exponents or args.alpha is not None:
            raise ValidationError("--preset replaces the system arguments")
        ports = preset(args.preset, args.tmax)
    else:
        ports = [portrait(_system(args), t_max=args.tmax)]
    csv_text = portraits_csv(ports)
    if args.out:
        _write(args.out + ".csv", csv_text)
        _write(args.out + ".svg", portraits_svg(ports))
    else:
        sys.stdout.write(csv_text)


def cmd_diagram(args):
    parts = args.box.split(",")
    if len(parts) != 4:
        raise ValidationError("--box: expected amin,amax,bmin,bmax")
    amin, amax, bmin, bmax = (_decimal(p, "--box") for p in parts)
    step = _decimal(args.step, "--step")
    if not step > 0 or amax < amin or bmax < bmin:
        raise ValidationError("--step must be positive and the box non-empty")
    rows = cls.region_diagram(((amin, amax), (bmin, bmax)), step)
    csv_text = cls.diagram_csv(rows)
    if args.out:
        _write(args.out + ".csv", csv_text)
        _write(args.out + ".svg", diagram_svg(rows))
    else:
        sys.stdout.write(csv_text)


def build_parser():
    p = _Parser(prog="glvstab", description="Stability analysis of planar generalized Lotka-Volterra systems.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="parse a .glv file and print the lowered system")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("classify", help="stability verdict")
    _add_system_args(s)
    s.add_argument("--all-k", action="store_true", help="classify for all rate constants")
    s.add_argument("--stoichiometric", type=float, metavar="N", help="all rates with k2 = N k3")
    s.add_argument("--no-certify", action="store_true", help="skip certificate construction")
    s.set_defaults(func=cmd_classify)

    for name, func, helptext in (
        ("equilibrium", cmd_equilibrium, "positive equilibrium"),
        ("jacobian", cmd_jacobian, "Jacobian at the equilibrium"),
        ("focal", cmd_focal, "first focal value at a trace-zero equilibrium"),
    ):
        s = sub.add_parser(name, help=helptext)
        _add_system_args(s)
        s.set_defaults(func=func)

    s = sub.add_parser("certify", help="emit a certificate as JSON")
    _add_system_args(s)
    s.add_argument("--kind", required=True, choices=["dulac", "integral", "invariant-set", "boundary-curve"])
    s.add_argument("--p", type=float, help="Dulac exponent p (default a1/2)")
    s.add_argument("--q", type=float, help="Dulac exponent q (default b3/2)")
    s.add_argument("--box-factor", type=float, default=1e3, help="grid spans [x*/F, x* F] x [y*/F, y* F]")
    s.add_argument("--grid", type=int, default=cert.DEFAULT_GRID, help="grid points per axis")
    s.add_argument("--lemma", choices=["L1", "L2", "L3", "L4"])
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("simulate", help="integrate one trajectory, CSV t,x,y")
    _add_system_args(s)
    s.add_argument("--x0", type=float, required=True)
    s.add_argument("--y0", type=float, required=True)
    s.add_argument("--tmax", type=float, default=1000.0)
    s.add_argument("--rtol", type=float, default=1e-9)
    s.add_argument("--atol", type=float, default=1e-11)
    s.add_argument("--no-periodic", action="store_true", help="disable closed-orbit detection")
    s.add_argument("--out", help="CSV path; a JSON sidecar is written next to it")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("portrait", help="nullclines and a trajectory fan")
    _add_system_args(s)
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--tmax", type=float, default=30.0)
    s.add_argument("--out", help="output prefix for PREFIX.csv and PREFIX.svg")
    s.set_defaults(func=cmd_portrait)

    s = sub.add_parser("diagram", help="(alpha, beta) stability diagram")
    s.add_argument("--box", default="-1,3,-1,3", help="amin,amax,bmin,bmax")
    s.add_argument("--step", default="0.05")
    s.add_argument("--out", help="output prefix for PREFIX.csv and PREFIX.svg")
    s.set_defaults(func=cmd_diagram)
    return p


_VALUE_FLAGS = ("--exponents", "--rates", "--alpha", "--beta", "--box", "--x0", "--y0", "--p", "--q", "--step")


def _attach_values(argv):
    """Rewrite '--flag -1,2' as '--flag=-1,2' so negative values are not read as options."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_attach_values(argv))
        args.func(args)
    except GlvError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except (OverflowError, FloatingPointError) as exc:
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return NumericalFailure.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
