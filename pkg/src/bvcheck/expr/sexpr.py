"""Prefix text form of GradedExpr.

Grammar (whitespace separated, ``;`` starts a comment)::

    expr    := number | param | name | "(" form ")"
    number  := integer | integer "/" integer
    param   := hbar | m | lambda0 | coupling | dimg
    form    := "+" expr*              sum (empty sum is 0)
             | "*" expr*              ordered product, labels shared by all factors
             | "-" expr               negation
             | "-" expr expr          difference
             | "vol" expr             volume-density flag
             | "D" index expr         covariant derivative (Leibniz over products)
             | "s0" expr              free BRST differential (table of values)
             | "f" lie lie lie        structure constants
             | "g" index index        metric, or Kronecker delta for mixed positions
             | "delta" index index    same as g
             | "delta" lie lie        Kronecker delta on Lie labels
             | name lie? index*       generator occurrence
    index   := "_" label | "^" label  lower / upper spacetime index
    lie     := label                  Lie label (bare token)

Generator names: A B C Cbar As Bs Cs Cbars phi phibar Abar Fbar a a2 phip
lam T (aliases: A‡ B‡ C‡ Cbar‡ lambda_cutoff a_var test_tensor).  The
printer emits only canonical spellings and round-trips exactly:
``parse(to_text(e)) == e``.
"""
from __future__ import annotations

import re

from ..errors import MalformedIndex, ParseError, UnknownGenerator
from .graded import (ALIASES, GENERATORS, PARAMS, Factor, GradedExpr, Term, derivative, gen, raw_mul,
                     s0)
from .num import Q

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")
_NUM = re.compile(r"^-?\d+(/\d+)?$")


def tokenize(text: str) -> list:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}")
        pos = m.end()
        if m.group(1):
            continue
        out.append(m.group(2) or m.group(3) or m.group(4))
    return out


def read(text: str):
    """Nested lists of tokens."""
    toks = tokenize(text)
    if not toks:
        raise ParseError("empty input")
    stack: list = [[]]
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise ParseError("unbalanced '('")
    if len(stack[0]) != 1:
        raise ParseError("expected exactly one expression")
    return stack[0][0]


def _index(tok):
    if not isinstance(tok, str) or len(tok) < 2 or tok[0] not in "_^":
        raise ParseError(f"expected a spacetime index, got {tok!r}")
    return tok[1:], tok[0]


def _is_index(tok) -> bool:
    return isinstance(tok, str) and len(tok) >= 2 and tok[0] in "_^"


def _lie(tok):
    if not isinstance(tok, str) or _is_index(tok) or not re.match(r"^[A-Za-z][\w]*$", tok):
        raise ParseError(f"expected a Lie label, got {tok!r}")
    return tok


def _build(node) -> GradedExpr:
    if isinstance(node, str):
        if _NUM.match(node):
            return GradedExpr.const(Q(node))
        if node in PARAMS:
            return GradedExpr.param(node)
        name = ALIASES.get(node, node)
        if name in GENERATORS:
            return GradedExpr.factor(gen(name))
        raise ParseError(f"unknown atom {node!r}")
    if not node:
        raise ParseError("empty form ()")
    head, args = node[0], node[1:]
    if not isinstance(head, str):
        raise ParseError("form head must be a symbol")
    try:
        return _form(head, args)
    except (MalformedIndex, UnknownGenerator) as exc:
        raise type(exc)(f"{exc} in ({head} ...)") from None


def _form(head, args) -> GradedExpr:
    if head == "+":
        out = GradedExpr()
        for a in args:
            out = out + _build(a)
        return out
    if head == "*":
        out = GradedExpr.const(1)
        for a in args:
            out = raw_mul(out, _build(a))
        return out
    if head == "-":
        if len(args) == 1:
            return -_build(args[0])
        if len(args) == 2:
            return _build(args[0]) - _build(args[1])
        raise ParseError("'-' takes one or two arguments")
    if head == "vol":
        if len(args) != 1:
            raise ParseError("'vol' takes one argument")
        return _build(args[0]).vol()
    if head == "D":
        if len(args) != 2:
            raise ParseError("'D' takes an index and an expression")
        label, pos = _index(args[0])
        return derivative(label, pos, _build(args[1]), rename=False)
    if head == "s0":
        if len(args) != 1:
            raise ParseError("'s0' takes one argument")
        return s0(_build(args[0]))
    if head == "f":
        if len(args) != 3:
            raise ParseError("'f' takes three Lie labels")
        return GradedExpr.factor(Factor("f", slots=tuple(_lie(a) for a in args)))
    if head in ("g", "delta"):
        if len(args) != 2:
            raise ParseError(f"'{head}' takes two indices")
        if head == "delta" and not _is_index(args[0]) and not _is_index(args[1]):
            return GradedExpr.factor(Factor("kd", slots=(_lie(args[0]), _lie(args[1]))))
        return GradedExpr.factor(Factor("g", slots=(_index(args[0]), _index(args[1]))))
    name = ALIASES.get(head, head)
    if name not in GENERATORS:
        raise ParseError(f"unknown form head {head!r}")
    lie = None
    rest = list(args)
    if rest and not _is_index(rest[0]):
        lie = _lie(rest.pop(0))
    slots = tuple(_index(a) for a in rest)
    return GradedExpr.factor(gen(name, lie, slots))


def parse(text: str) -> GradedExpr:
    return _build(read(text))


# ---------------------------------------------------------------- printing


def _fmt_q(c) -> str:
    c = Q(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def factor_text(f: Factor) -> str:
    if f.kind == "f":
        return "(f " + " ".join(f.slots) + ")"
    if f.kind == "kd":
        return "(delta " + " ".join(f.slots) + ")"
    if f.kind == "g":
        head = "g" if f.slots[0][1] == f.slots[1][1] else "delta"
        return f"({head} " + " ".join(p + l for l, p in f.slots) + ")"
    parts = [f.name]
    if f.lie is not None:
        parts.append(f.lie)
    parts += [p + l for l, p in f.slots]
    s = "(" + " ".join(parts) + ")"
    for label, pos in reversed(f.derivs):
        s = f"(D {pos}{label} {s})"
    return s


def term_text(t: Term) -> str:
    items = []
    if t.coef != 1 or (not t.factors and not t.params):
        items.append(_fmt_q(t.coef))
    for name, k in t.params:
        items += [name] * k
    items += [factor_text(f) for f in t.factors]
    body = items[0] if len(items) == 1 else "(* " + " ".join(items) + ")"
    return f"(vol {body})" if t.vol else body


def to_text(e: GradedExpr) -> str:
    if not e.terms:
        return "0"
    if len(e.terms) == 1:
        return term_text(e.terms[0])
    return "(+ " + " ".join(term_text(t) for t in e.terms) + ")"
