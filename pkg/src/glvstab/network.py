"""Reader and writer for ``.glv`` network files.

A file describes the three-node cycle 0 -> nX -> Y -> 0 with power-law
kinetic orders attached to each node::

    cycle {
        n = 1;            # stoichiometric coefficient of X in node 2
        k12 = 1; k23 = 1; k31 = 1;
        order1 = X^1;
        order2 = X^1 Y^1;
        # order3 defaults to the stoichiometric complex Y^1
    }

Grammar::

    network := "cycle" "{" stmt* "}"
    stmt    := key "=" value ";"
    key     := n | k12 | k23 | k31 | order1 | order2 | order3
    value   := float | term+
    term    := ("X" | "Y") "^" float
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .model import GlvSystem

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[{}=;^])
    """,
    re.VERBOSE,
)

_RATE_KEYS = ("k12", "k23", "k31")
_ORDER_KEYS = ("order1", "order2", "order3")


@dataclass(frozen=True)
class ReactionNetwork:
    n: float
    rate12: float
    rate23: float
    rate31: float
    order1: tuple  # (alpha1, beta1)
    order2: tuple  # (alpha2, beta2)
    order3: tuple = (0.0, 1.0)

    def __post_init__(self):
        for name in ("n", "rate12", "rate23", "rate31"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")
        for name in _ORDER_KEYS:
            order = tuple(float(e) for e in getattr(self, name))
            if len(order) != 2 or not all(math.isfinite(e) for e in order):
                raise ValidationError(f"{name} must be two finite exponents")
            object.__setattr__(self, name, order)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else ("end of input" if kind == "eof" else kind)
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            raise ParseError(f"expected {want}, got {got}", tok.line, tok.col)
        return tok

    def number(self):
        return float(self.expect("number").text)

    def order(self):
        exps = {}
        first = self.peek()
        while self.peek().kind == "ident":
            tok = self.next()
            if tok.text not in ("X", "Y"):
                raise ParseError(f"unknown species {tok.text!r}; only X and Y exist", tok.line, tok.col)
            if tok.text in exps:
                raise ParseError(f"duplicate species {tok.text!r} in complex", tok.line, tok.col)
            self.expect("punct", "^")
            exps[tok.text] = self.number()
        if not exps:
            raise ParseError("expected a complex such as 'X^1 Y^1'", first.line, first.col)
        return (exps.get("X", 0.0), exps.get("Y", 0.0))

    def parse(self):
        self.expect("ident", "cycle")
        self.expect("punct", "{")
        values = {}
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            key = self.expect("ident")
            if key.text not in ("n",) + _RATE_KEYS + _ORDER_KEYS:
                raise ParseError(f"unknown key {key.text!r}", key.line, key.col)
            if key.text in values:
                raise ParseError(f"duplicate key {key.text!r}", key.line, key.col)
            self.expect("punct", "=")
            if key.text in _ORDER_KEYS:
                value = self.order()
            else:
                tok = self.peek()
                value = self.number()
                if not value > 0:
                    what = "n" if key.text == "n" else f"rate {key.text}"
                    raise ParseError(f"non-positive {what}: {value!r}", tok.line, tok.col)
            self.expect("punct", ";")
            values[key.text] = (value, key)
        close = self.expect("punct", "}")
        self.expect("eof")
        for required in ("n",) + _RATE_KEYS + ("order1", "order2"):
            if required not in values:
                raise ParseError(f"missing key {required!r}", close.line, close.col)
        kwargs = {k: v for k, (v, _) in values.items()}
        return ReactionNetwork(
            n=kwargs["n"],
            rate12=kwargs["k12"],
            rate23=kwargs["k23"],
            rate31=kwargs["k31"],
            order1=kwargs["order1"],
            order2=kwargs["order2"],
            order3=kwargs.get("order3", (0.0, 1.0)),
        )


def parse_network(text: str) -> ReactionNetwork:
    return _Parser(text).parse()


def load_network(path) -> ReactionNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_network(text)


def lower(net: ReactionNetwork) -> GlvSystem:
    """Rates k1 = n k12, k2 = n k23, k3 = k23, k4 = k31; exponents copied."""
    (a1, b1), (a2, b2), (a3, b3) = net.order1, net.order2, net.order3
    return GlvSystem(
        a1, b1, a2, b2, a3, b3,
        k1=net.n * net.rate12,
        k2=net.n * net.rate23,
        k3=net.rate23,
        k4=net.rate31,
    )


def _fmt_order(order):
    return f"X^{order[0]!r} Y^{order[1]!r}"


def render(net: ReactionNetwork) -> str:
    """Inverse of parse_network; floats are written with repr so they round-trip exactly."""
    return (
        "cycle {\n"
        f"    n = {net.n!r};\n"
        f"    k12 = {net.rate12!r};\n"
        f"    k23 = {net.rate23!r};\n"
        f"    k31 = {net.rate31!r};\n"
        f"    order1 = {_fmt_order(net.order1)};\n"
        f"    order2 = {_fmt_order(net.order2)};\n"
        f"    order3 = {_fmt_order(net.order3)};\n"
        "}\n"
    )
