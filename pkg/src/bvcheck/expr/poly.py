"""Graded commutative polynomials with exact rational coefficients.

Variables are small ints.  A variable's parity is looked up through the
letter table: variable ``v`` belongs to letter ``v >> 2`` and component
``v & 3`` (0 for scalar letters, 1..3 for su(2) components).

A monomial is a sorted tuple of variables; odd variables appear at most
once.  The value of a monomial is the ordered product of its variables,
so every reordering is paid for with a Koszul sign.
"""
from __future__ import annotations

from .num import Q

from . import letters as L

PAR = L.PAR


def vpar(v: int) -> int:
    return PAR[v >> 2]


def mono_mul(a: tuple, b: tuple):
    """Return (monomial, sign) for the product a*b, sign 0 if it vanishes."""
    if not a:
        return b, 1
    if not b:
        return a, 1
    oa = [x for x in a if PAR[x >> 2]]
    ob = [y for y in b if PAR[y >> 2]]
    sign = 1
    if oa and ob:
        sb = set(ob)
        inv = 0
        for x in oa:
            if x in sb:
                return None, 0
            for y in ob:
                if y < x:
                    inv += 1
        if inv & 1:
            sign = -1
    if a[-1] <= b[0]:
        return a + b, sign
    return tuple(sorted(a + b)), sign


def mono_parity(m: tuple) -> int:
    p = 0
    for v in m:
        p ^= PAR[v >> 2]
    return p


class Poly:
    """Sparse polynomial: dict monomial -> Q."""

    __slots__ = ("t",)

    def __init__(self, t=None):
        self.t = t if t is not None else {}

    @staticmethod
    def const(c) -> "Poly":
        c = Q(c)
        return Poly({(): c} if c else {})

    @staticmethod
    def var(v: int) -> "Poly":
        return Poly({(v,): Q(1)})

    def copy(self) -> "Poly":
        return Poly(dict(self.t))

    def __bool__(self):
        return bool(self.t)

    def is_zero(self) -> bool:
        return not self.t

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        return iter(self.t.items())

    def iadd(self, other: "Poly", c=1) -> "Poly":
        t = self.t
        for m, v in other.t.items():
            w = t.get(m, 0) + c * v
            if w:
                t[m] = w
            else:
                t.pop(m, None)
        return self

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.copy().iadd(other)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.copy().iadd(other, -1)

    def __rsub__(self, other):
        return Poly.const(other) - self

    def __neg__(self):
        return Poly({m: -v for m, v in self.t.items()})

    def scale(self, c) -> "Poly":
        if not c:
            return Poly()
        return Poly({m: c * v for m, v in self.t.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if hasattr(other, "rmul_scalar"):
                return other.rmul_scalar(self)
            return self.scale(Q(other))
        out: dict = {}
        for ma, va in self.t.items():
            for mb, vb in other.t.items():
                m, s = mono_mul(ma, mb)
                if s:
                    w = out.get(m, 0) + s * va * vb
                    if w:
                        out[m] = w
                    else:
                        out.pop(m, None)
        return Poly(out)

    def __rmul__(self, other):
        return self.scale(Q(other))

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.t == other.t

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def parity(self):
        ps = {mono_parity(m) for m in self.t}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def variables(self) -> set:
        out = set()
        for m in self.t:
            out.update(m)
        return out

    def letters(self) -> set:
        return {v >> 2 for v in self.variables()}

    def deriv(self, v: int, side: str = "L") -> "Poly":
        """Left (side 'L') or right ('R') partial derivative by variable v."""
        out: dict = {}
        odd = PAR[v >> 2]
        for m, c in self.t.items():
            if v not in m:
                continue
            if not odd:
                k = m.count(v)
                i = m.index(v)
                r = m[:i] + m[i + 1:]
                w = out.get(r, 0) + k * c
            else:
                i = m.index(v)
                if side == "L":
                    n = sum(PAR[x >> 2] for x in m[:i])
                else:
                    n = sum(PAR[x >> 2] for x in m[i + 1:])
                r = m[:i] + m[i + 1:]
                w = out.get(r, 0) + (-c if n & 1 else c)
            if w:
                out[r] = w
            else:
                out.pop(r, None)
        return Poly(out)

    def derive(self, image, p: int) -> "Poly":
        """Apply the derivation of parity p whose value on variable v is image(v).

        image returns a Poly or None (meaning zero).  The derivation acts
        from the left, so passing an odd factor costs (-1)^p.
        """
        out = Poly()
        cache: dict = {}
        for m, c in self.t.items():
            before = 0
            for i, v in enumerate(m):
                if v in cache:
                    img = cache[v]
                else:
                    img = cache[v] = image(v)
                if img:
                    sgn = -1 if (p and before & 1) else 1
                    left = m[:i]
                    right = m[i + 1:]
                    for mi, ci in img.t.items():
                        mm, s1 = mono_mul(left, mi)
                        if not s1:
                            continue
                        mm, s2 = mono_mul(mm, right)
                        if not s2:
                            continue
                        w = out.t.get(mm, 0) + sgn * s1 * s2 * c * ci
                        if w:
                            out.t[mm] = w
                        else:
                            out.t.pop(mm, None)
                before += PAR[v >> 2]
        return out

    def subst(self, image) -> "Poly":
        """Replace every variable v with image(v) (None keeps v)."""
        out = Poly()
        cache: dict = {}
        for m, c in self.t.items():
            imgs = []
            hit = False
            for v in m:
                if v not in cache:
                    cache[v] = image(v)
                img = cache[v]
                imgs.append(img)
                hit = hit or img is not None
            if not hit:
                out.iadd(Poly({m: c}))
                continue
            acc = Poly.const(c)
            for v, img in zip(m, imgs):
                acc = acc * (Poly.var(v) if img is None else img)
                if not acc:
                    break
            out.iadd(acc)
        return out

    def sorted_terms(self):
        def key(item):
            m = item[0]
            return (len(m), [(L.sort_key(v >> 2), v & 3) for v in m])

        return sorted(self.t.items(), key=key)

    def __repr__(self):
        return "Poly(" + fmt_poly(self) + ")"


def fmt_var(v: int) -> str:
    let = L.get(v >> 2)
    comp = v & 3
    return let.label() + (f"^{comp}" if comp else "")


def fmt_coef(c: Q) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def fmt_poly(p: Poly) -> str:
    if not p.t:
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        body = "*".join(fmt_var(v) for v in m)
        if not body:
            parts.append(fmt_coef(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append(fmt_coef(c) + "*" + body)
    return " + ".join(parts).replace("+ -", "- ")
