"""Phase-portrait and stability-diagram data, with minimal SVG renderings.

The CSV payload is the deliverable; SVG is a convenience view of the same numbers.
Portrait CSV rows are ``kind,id,x,y`` where kind is one of x_nullcline,
y_nullcline, trajectory, equilibrium, set_boundary or boundary_curve.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import certificates as cert
from .equilibrium import UNIQUE, solve_equilibrium
from .errors import GlvError, ValidationError
from .model import GlvSystem, ReducedSystem, as_reduced
from .simulate import SimConfig, integrate

NULLCLINE_POINTS = 400
FAN_STARTS = 8
MAX_POINTS_PER_TRAJECTORY = 600


@dataclass
class Panel:
    title: str
    system: object
    invariant_set: bool = False
    boundary_curve: bool = False


@dataclass
class Portrait:
    title: str
    box: tuple  # ((xmin, xmax), (ymin, ymax))
    rows: list = field(default_factory=list)  # (kind, id, x, y)

    def add(self, kind, ident, xs, ys):
        for x, y in zip(xs, ys):
            self.rows.append((kind, ident, float(x), float(y)))


def _red(a1, b1, a3, b3):
    return ReducedSystem(a1, b1, a3, b3)


# preset panels, one sign pattern each; rates are all 1
PRESETS = {
    "fig2": [Panel("a1=b3=0, a3<=-1, b1<=-1", _red(0.0, -1.5, -1.5, 0.0))],
    "fig3": [
        Panel("a1=b3=0, a3>0, b1>0", _red(0.0, 0.5, 0.5, 0.0)),
        Panel("a1=b3=0, -1<a3<0, -1<b1<0", _red(0.0, -0.5, -0.5, 0.0)),
        Panel("a1=b3=0, -1<a3<0, b1<=-1", _red(0.0, -1.5, -0.5, 0.0)),
        Panel("a1=b3=0, a3<=-1, -1<b1<0", _red(0.0, -0.5, -1.5, 0.0)),
    ],
    "fig4": [
        Panel(f"a1=-1, b3=1, a3={a3}, b1={b1}", _red(-1.0, b1, a3, 1.0))
        for a3 in (0.5, 0.0, -0.5)
        for b1 in (-0.5, 0.0, 0.5)
    ],
    "fig5": [
        Panel("a1<0=b3, a3>0, b1>0", _red(-1.0, 0.5, 0.5, 0.0)),
        Panel("a1=0<b3, a3>0, b1>0", _red(0.0, 0.5, 0.5, 1.5)),
        Panel("a1<0=b3, a3<0, b1<=-1", _red(-1.0, -1.5, -0.5, 0.0)),
        Panel("a1=0<b3, a3<=-1, b1<0", _red(0.0, -0.5, -1.5, 1.5)),
        Panel("a1<0=b3, a3<0, -1<b1<0", _red(-1.0, -0.5, -0.5, 0.0), boundary_curve=True),
        Panel("a1=0<b3, -1<a3<0, b1<0", _red(0.0, -0.5, -0.5, 1.5), boundary_curve=True),
    ],
    "fig6": [
        Panel("a1<0=b3, a3<0, -1<b1<0", _red(-1.0, -0.5, -0.5, 0.0), boundary_curve=True),
        Panel("a1=0<b3, -1<a3<0, b1<0", _red(0.0, -0.5, -0.5, 1.5), boundary_curve=True),
    ],
    "fig7": [
        Panel("L1: all exponents negative", _red(-1.0, -2.0, -1.0, -1.0), invariant_set=True),
        Panel("L2: a1<0, b1>0, a3>0, b3<0", _red(-0.25, 3.0, 0.5, -2.0), invariant_set=True),
        Panel("L3: all exponents positive", _red(1.0, 2.0, 2.0, 1.0), invariant_set=True),
        Panel("L4: a1>0, b1<0, a3<0, b3>0", _red(0.8, -0.6, -1.0, 0.4), invariant_set=True),
    ],
    "fig8": [Panel("alpha=1.25, beta=0.5", GlvSystem.alpha_beta(1.25, 0.5))],
    "fig9": [
        Panel("alpha=1.25, beta=0.5, below the x-nullcline", GlvSystem.alpha_beta(1.25, 0.5)),
        Panel("alpha=1.25, beta=0.5, above the x-nullcline near y=0", GlvSystem.alpha_beta(1.25, 0.5)),
    ],
}


def default_box(x_star, y_star, scale=3.0):
    return ((0.0, scale * x_star), (0.0, scale * y_star))


def nullcline(a, b, rhs, box, n=NULLCLINE_POINTS):
    """Points of x^a y^b = rhs inside the box (log-spaced in the free variable)."""
    (xmin, xmax), (ymin, ymax) = box
    lr = math.log(rhs)
    if b != 0:
        lo = math.log(max(xmin, xmax * 1e-4))
        xs = np.exp(np.linspace(lo, math.log(xmax), n))
        ys = np.exp((lr - a * np.log(xs)) / b)
    elif a != 0:
        ylo = math.log(max(ymin, ymax * 1e-4))
        ys = np.exp(np.linspace(ylo, math.log(ymax), n))
        xs = np.full_like(ys, math.exp(lr / a))
    else:
        return np.array([]), np.array([])
    keep = (ys >= ymin) & (ys <= ymax) & np.isfinite(ys)
    return xs[keep], ys[keep]


def fan_starts(x_star, y_star, box, n=FAN_STARTS):
    """Initial points on an ellipse around the equilibrium, inside the box."""
    (xmin, xmax), (ymin, ymax) = box
    rx = 0.6 * min(x_star - xmin, xmax - x_star)
    ry = 0.6 * min(y_star - ymin, ymax - y_star)
    ang = 2 * math.pi * (np.arange(n) + 0.5) / n
    return [(x_star + rx * math.cos(t), y_star + ry * math.sin(t)) for t in ang]


def _thin(xs, ys, m=MAX_POINTS_PER_TRAJECTORY):
    if len(xs) <= m:
        return xs, ys
    idx = np.unique(np.linspace(0, len(xs) - 1, m).astype(int))
    return xs[idx], ys[idx]


def portrait(sys, box=None, starts=None, t_max=30.0, invariant_set=False, boundary_curve=False, title=""):
    red = as_reduced(sys)
    eq = solve_equilibrium(red)
    if eq.kind != UNIQUE:
        raise ValidationError("portrait needs a unique positive equilibrium")
    box = box or default_box(eq.x, eq.y)
    out = Portrait(title, box)
    out.add("x_nullcline", 0, *nullcline(red.a1, red.b1, red.k2 / red.k1, box))
    out.add("y_nullcline", 0, *nullcline(red.a3, red.b3, red.k3 / red.k4, box))
    out.add("equilibrium", 0, [eq.x], [eq.y])
    cfg = SimConfig(t_max=t_max, detect_periodic=False)
    for i, (x0, y0) in enumerate(starts or fan_starts(eq.x, eq.y, box)):
        tr = integrate(sys, x0, y0, cfg)
        out.add("trajectory", i, *_thin(tr.x, tr.y))
    if invariant_set:
        c = cert.invariant_set(red)
        out.add("set_boundary", 0, *_set_outline(c, box))
    if boundary_curve:
        bc = cert.boundary_curve(red)
        lo, hi = bc.domain()
        if bc.variable == "x":
            s = np.linspace(lo, hi, NULLCLINE_POINTS + 1)[1:-1]
            out.add("boundary_curve", 0, s, bc(s))
        else:
            s = np.linspace(hi if math.isfinite(hi) else lo, box[1][1], NULLCLINE_POINTS)[1:]
            out.add("boundary_curve", 0, bc(s), s)
    return out


def _set_outline(c: cert.InvariantSetCertificate, box):
    """Boundary of the certified set: the curve y = x^gamma and the straight piece."""
    (xmin, xmax), (ymin, ymax) = box
    g, x0 = c.gamma, c.x0
    if c.lemma == cert.L3:
        xs = np.linspace(x0, max(xmin, x0 * 1e-3), NULLCLINE_POINTS)
    else:
        xs = np.linspace(x0, max(xmax, 4 * x0), NULLCLINE_POINTS)
    curve_y = xs ** g
    if c.lemma in (cert.L1, cert.L2):
        # vertical piece at x0, then the curve
        far = ymin if c.lemma == cert.L1 else max(ymax, x0 ** g)
        px = np.concatenate([[x0], xs])
        py = np.concatenate([[far], curve_y])
        return px, py
    y0 = x0 ** g
    px = np.concatenate([xs[::-1], xs])
    py = np.concatenate([np.full_like(xs, y0), curve_y])
    return px, py


def preset(name, t_max=30.0):
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    out = []
    for i, p in enumerate(PRESETS[name]):
        red = as_reduced(p.system)
        eq = solve_equilibrium(red)
        box = default_box(eq.x, eq.y)
        starts = None
        if name == "fig9":
            starts = _fig9_starts(i)
        if p.invariant_set:
            c = cert.invariant_set(red)
            px, py = c.interior_point()
            box = ((0.0, 3 * max(eq.x, px)), (0.0, 3 * max(eq.y, py)))
            starts = fan_starts(eq.x, eq.y, box, FAN_STARTS - 2) + [(px, py), _second_interior(c)]
        out.append(portrait(p.system, box, starts, t_max, p.invariant_set, p.boundary_curve, p.title))
    return out


def _second_interior(c):
    x, y = c.interior_point()
    if c.lemma == cert.L3:
        return x / 2, math.sqrt(c.x0 ** c.gamma * (x / 2) ** c.gamma)
    if c.lemma == cert.L1:
        return 2 * x, 0.5 * (2 * x) ** c.gamma
    if c.lemma == cert.L2:
        return 2 * x, 2 * (2 * x) ** c.gamma
    return 2 * x, math.sqrt(c.x0 ** c.gamma * (2 * x) ** c.gamma)


def _fig9_starts(panel):
    # x-nullcline of the (1.25, 0.5) system is y = x^(1/4)
    if panel == 0:
        return [(x, 0.5 * x ** 0.25) for x in (1.5, 2.0, 2.5, 2.9)]
    return [(x, 1e-3) for x in (0.2, 0.5, 1.0, 2.0)]


def portraits_csv(portraits):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["panel", "kind", "id", "x", "y"])
    for p_i, p in enumerate(portraits):
        for kind, ident, x, y in p.rows:
            w.writerow([p_i, kind, ident, repr(x), repr(y)])
    return buf.getvalue()


# ---------------------------------------------------------------- SVG

_COLORS = {
    "x_nullcline": "#d62728",
    "y_nullcline": "#2ca02c",
    "trajectory": "#1f77b4",
    "set_boundary": "#9467bd",
    "boundary_curve": "#ff7f0e",
}
PANEL = 320
PAD = 30


def _segments(xs, ys, box):
    """Split a polyline at points outside the box."""
    (xmin, xmax), (ymin, ymax) = box
    seg = []
    for x, y in zip(xs, ys):
        if xmin <= x <= xmax and ymin <= y <= ymax:
            seg.append((x, y))
        elif seg:
            yield seg
            seg = []
    if seg:
        yield seg


def _panel_svg(p: Portrait, ox, oy):
    (xmin, xmax), (ymin, ymax) = p.box
    w = PANEL - 2 * PAD

    def sx(x):
        return ox + PAD + (x - xmin) / (xmax - xmin) * w

    def sy(y):
        return oy + PAD + (1 - (y - ymin) / (ymax - ymin)) * w

    parts = [
        f'<rect x="{ox + PAD}" y="{oy + PAD}" width="{w}" height="{w}" fill="none" stroke="#000"/>',
        f'<text x="{ox + PAD}" y="{oy + PAD - 8}" font-size="10">{_esc(p.title)}</text>',
        f'<text x="{ox + PAD}" y="{oy + PAD + w + 14}" font-size="9">x: [{xmin:.3g}, {xmax:.3g}]  y: [{ymin:.3g}, {ymax:.3g}]</text>',
    ]
    groups = {}
    for kind, ident, x, y in p.rows:
        groups.setdefault((kind, ident), ([], []))
        groups[(kind, ident)][0].append(x)
        groups[(kind, ident)][1].append(y)
    for (kind, _), (xs, ys) in groups.items():
        if kind == "equilibrium":
            parts.append(f'<circle cx="{sx(xs[0]):.2f}" cy="{sy(ys[0]):.2f}" r="3" fill="#000"/>')
            continue
        color = _COLORS[kind]
        width = 0.8 if kind == "trajectory" else 1.6
        for seg in _segments(xs, ys, p.box):
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in seg)
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>')
    return parts


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def portraits_svg(portraits, columns=None):
    n = len(portraits)
    columns = columns or min(n, 3)
    rows = math.ceil(n / columns)
    W, H = columns * PANEL, rows * PANEL
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="#fff"/>']
    for i, p in enumerate(portraits):
        parts += _panel_svg(p, (i % columns) * PANEL, (i // columns) * PANEL)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


DIAGRAM_COLORS = {
    "GAS": "#2ca02c",
    "AS-not-GAS": "#bcbd22",
    "Unstable": "#d62728",
    "Center": "#1f77b4",
    "Zip": "#000000",
    "Undetermined": "#7f7f7f",
}


def diagram_svg(rows, cell=6):
    """Heat map of (alpha, beta, label) rows; alpha to the right, beta up."""
    alphas = sorted({float(a) for a, _, _ in rows})
    betas = sorted({float(b) for _, b, _ in rows})
    ia = {a: i for i, a in enumerate(alphas)}
    ib = {b: i for i, b in enumerate(betas)}
    W, H = len(alphas) * cell + 2 * PAD, len(betas) * cell + 2 * PAD + 20
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="#fff"/>']
    for a, b, lab in rows:
        x = PAD + ia[float(a)] * cell
        y = PAD + (len(betas) - 1 - ib[float(b)]) * cell
        parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{DIAGRAM_COLORS[lab]}"/>')
    parts.append(
        f'<text x="{PAD}" y="{H - 8}" font-size="10">alpha: [{alphas[0]}, {alphas[-1]}]  beta: [{betas[0]}, {betas[-1]}]</text>'
    )
    lx = PAD
    for lab, col in DIAGRAM_COLORS.items():
        parts.append(f'<rect x="{lx}" y="8" width="10" height="10" fill="{col}"/>')
        parts.append(f'<text x="{lx + 13}" y="17" font-size="9">{lab}</text>')
        lx += 13 + 7 * len(lab) + 10
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
