"""Lie-algebra backends for jet polynomials.

Two interchangeable realizations of "scalars" (invariant polynomials) and
"Lie elements" (adjoint valued polynomials):

* ``Su2``: explicit components I = 1, 2, 3 with f^{IJK} = eps^{IJK}.  A
  scalar is a :class:`Poly`, a Lie element a :class:`Vec3`.  This is the
  enumeration oracle.
* ``Words``: fields are generic gl(N) valued letters.  Scalars are
  products of cyclic trace words, Lie elements carry one open word.  The
  graded commutator and the form <X, Y> = -2 Tr(XY) only see antisymmetry,
  Jacobi and invariance of the form, so identities proven here hold for
  any quadratic Lie algebra (no trace identities exist for generic N at
  the degrees used).

Both backends expose the same small interface used by the jet engine:
``lie(lid)``, ``scalar(lid)``, element arithmetic, ``bracket``, ``pair``,
``derive`` (graded derivations), ``subst``, ``deriv`` (partial
derivatives) and ``letters``.
"""
from __future__ import annotations

from .num import Q

from . import letters as L
from .poly import Poly, fmt_coef, fmt_poly

PAR = L.PAR
HALF = Q(1, 2)


# ---------------------------------------------------------------- su(2)


class Vec3:
    __slots__ = ("c",)

    def __init__(self, c=None):
        self.c = tuple(c) if c is not None else (Poly(), Poly(), Poly())

    def __bool__(self):
        return any(self.c)

    def is_zero(self):
        return not any(self.c)

    def __add__(self, o):
        return Vec3(a + b for a, b in zip(self.c, o.c))

    def __sub__(self, o):
        return Vec3(a - b for a, b in zip(self.c, o.c))

    def __neg__(self):
        return Vec3(-a for a in self.c)

    def scale(self, k):
        return Vec3(a.scale(k) for a in self.c)

    def rmul_scalar(self, p: Poly):
        return Vec3(p * a for a in self.c)

    def __mul__(self, p):
        if isinstance(p, Poly):
            return Vec3(a * p for a in self.c)
        return self.scale(Q(p))

    def __rmul__(self, k):
        return self.scale(Q(k))

    def __eq__(self, o):
        return isinstance(o, Vec3) and all(a == b for a, b in zip(self.c, o.c))

    def bracket(self, o):
        a, b = self.c, o.c
        return Vec3((a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]))

    def pair(self, o):
        a, b = self.c, o.c
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]

    def letters(self):
        out = set()
        for a in self.c:
            out |= a.letters()
        return out

    def size(self):
        return sum(len(a) for a in self.c)

    def __repr__(self):
        return "Vec3(" + ", ".join(fmt_poly(a) for a in self.c) + ")"


class Su2:
    name = "su2"

    def lie(self, lid: int) -> Vec3:
        b = lid << 2
        return Vec3((Poly.var(b + 1), Poly.var(b + 2), Poly.var(b + 3)))

    def scalar(self, lid: int) -> Poly:
        return Poly.var(lid << 2)

    def const(self, c) -> Poly:
        return Poly.const(c)

    def zero_s(self) -> Poly:
        return Poly()

    def zero_l(self) -> Vec3:
        return Vec3()

    def is_lie(self, x) -> bool:
        return isinstance(x, Vec3)

    @staticmethod
    def _var_image(image):
        cache: dict = {}

        def vimg(v):
            lid = v >> 2
            if lid not in cache:
                cache[lid] = image(lid)
            img = cache[lid]
            if img is None:
                return None
            comp = v & 3
            return img.c[comp - 1] if comp else img

        return vimg

    def derive(self, x, image, p: int = 0):
        vimg = self._var_image(image)
        if isinstance(x, Vec3):
            return Vec3(a.derive(vimg, p) for a in x.c)
        return x.derive(vimg, p)

    def subst(self, x, image):
        vimg = self._var_image(image)
        if isinstance(x, Vec3):
            return Vec3(a.subst(vimg) for a in x.c)
        return x.subst(vimg)

    def deriv(self, s: Poly, lid: int, side: str = "L"):
        let = L.get(lid)
        b = lid << 2
        if let.lie:
            return Vec3(s.deriv(b + i, side) for i in (1, 2, 3))
        return s.deriv(b, side)

    def letters(self, x) -> set:
        return x.letters()

    def filter(self, x, keep):
        """Terms whose letter-id list satisfies keep."""

        def one(p):
            return Poly({m: c for m, c in p.t.items() if keep([v >> 2 for v in m])})

        if isinstance(x, Vec3):
            return Vec3(one(a) for a in x.c)
        return one(x)

    def size(self, x) -> int:
        return x.size() if isinstance(x, Vec3) else len(x)

    def fmt(self, x) -> str:
        if isinstance(x, Vec3):
            return "[" + "; ".join(fmt_poly(a) for a in x.c) + "]"
        return fmt_poly(x)

    def key(self, x):
        if isinstance(x, Vec3):
            return tuple(frozenset(a.t.items()) for a in x.c)
        return frozenset(x.t.items())


# ---------------------------------------------------------------- words


def _wpar(word) -> int:
    p = 0
    for x in word:
        p ^= PAR[x]
    return p


def canon_trace(word: tuple):
    """Canonical cyclic representative of Tr(word) and its Koszul sign.

    Returns (word, 0) when the trace vanishes because two rotations agree
    with opposite signs.
    """
    n = len(word)
    tot = _wpar(word)
    best = None
    bsign = 1
    conflict = False
    sign = 1
    w = word
    for _ in range(n):
        if best is None or w < best:
            best, bsign, conflict = w, sign, False
        elif w == best and sign != bsign:
            conflict = True
        # Tr(a R) = (-1)^{|a||R|} Tr(R a)
        a = w[0]
        if PAR[a] and (tot ^ PAR[a]):
            sign = -sign
        w = w[1:] + w[:1]
    if conflict:
        return best, 0
    return best, bsign


def sort_traces(traces: list):
    """Sort trace factors, returning (tuple, sign); sign 0 on odd squares."""
    pars = [_wpar(t) for t in traces]
    items = list(zip(traces, pars))
    sign = 1
    # insertion sort tracking odd transpositions
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1][0] > items[j][0]:
            if items[j - 1][1] and items[j][1]:
                sign = -sign
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    for i in range(1, len(items)):
        if items[i][1] and items[i][0] == items[i - 1][0]:
            return None, 0
    return tuple(t for t, _ in items), sign


def _tpar(traces) -> int:
    p = 0
    for t in traces:
        p ^= _wpar(t)
    return p


def _merge_plain(a, b):
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


def _acc(d: dict, k, v):
    w = d.get(k, 0) + v
    if w:
        d[k] = w
    else:
        d.pop(k, None)


class WScalar:
    """Sum of c * plain * Tr(w1) * Tr(w2) ...; key (plain, traces)."""

    __slots__ = ("t",)

    def __init__(self, t=None):
        self.t = t if t is not None else {}

    def __bool__(self):
        return bool(self.t)

    def is_zero(self):
        return not self.t

    def __len__(self):
        return len(self.t)

    def copy(self):
        return WScalar(dict(self.t))

    def iadd(self, o, c=1):
        for k, v in o.t.items():
            _acc(self.t, k, c * v)
        return self

    def __add__(self, o):
        if not isinstance(o, WScalar):
            o = WScalar({((), ()): Q(o)} if o else {})
        return self.copy().iadd(o)

    __radd__ = __add__

    def __sub__(self, o):
        if not isinstance(o, WScalar):
            o = WScalar({((), ()): Q(o)} if o else {})
        return self.copy().iadd(o, -1)

    def __neg__(self):
        return WScalar({k: -v for k, v in self.t.items()})

    def scale(self, c):
        if not c:
            return WScalar()
        return WScalar({k: c * v for k, v in self.t.items()})

    def __mul__(self, o):
        if isinstance(o, WLie):
            return o.rmul_scalar(self)
        if not isinstance(o, WScalar):
            return self.scale(Q(o))
        out: dict = {}
        for (pa, ta), ca in self.t.items():
            for (pb, tb), cb in o.t.items():
                tr, s = sort_traces(list(ta) + list(tb))
                if s:
                    _acc(out, (_merge_plain(pa, pb), tr), s * ca * cb)
        return WScalar(out)

    def __rmul__(self, c):
        return self.scale(Q(c))

    def __eq__(self, o):
        if not isinstance(o, WScalar):
            o = WScalar({((), ()): Q(o)} if o else {})
        return self.t == o.t

    def letters(self):
        out = set()
        for (p, tr) in self.t:
            out.update(p)
            for w in tr:
                out.update(w)
        return out


class WLie:
    """Sum of c * plain * traces * W with W an open word; key (plain, traces, W)."""

    __slots__ = ("t",)

    def __init__(self, t=None):
        self.t = t if t is not None else {}

    def __bool__(self):
        return bool(self.t)

    def is_zero(self):
        return not self.t

    def __len__(self):
        return len(self.t)

    def copy(self):
        return WLie(dict(self.t))

    def iadd(self, o, c=1):
        for k, v in o.t.items():
            _acc(self.t, k, c * v)
        return self

    def __add__(self, o):
        return self.copy().iadd(o)

    def __sub__(self, o):
        return self.copy().iadd(o, -1)

    def __neg__(self):
        return WLie({k: -v for k, v in self.t.items()})

    def scale(self, c):
        if not c:
            return WLie()
        return WLie({k: c * v for k, v in self.t.items()})

    def __rmul__(self, c):
        return self.scale(Q(c))

    def rmul_scalar(self, s: WScalar):
        """s * self."""
        out: dict = {}
        for (ps, ts), cs in s.t.items():
            for (pl, tl, w), cl in self.t.items():
                tr, sg = sort_traces(list(ts) + list(tl))
                if sg:
                    _acc(out, (_merge_plain(ps, pl), tr, w), sg * cs * cl)
        return WLie(out)

    def __mul__(self, o):
        """self * o for a scalar o (scalar moved left past the open word)."""
        if not isinstance(o, WScalar):
            return self.scale(Q(o))
        out: dict = {}
        for (pl, tl, w), cl in self.t.items():
            pw = _wpar(w)
            for (ps, ts), cs in o.t.items():
                sg0 = -1 if (pw and _tpar(ts)) else 1
                tr, sg = sort_traces(list(tl) + list(ts))
                if sg:
                    _acc(out, (_merge_plain(ps, pl), tr, w), sg0 * sg * cs * cl)
        return WLie(out)

    def __eq__(self, o):
        return isinstance(o, WLie) and self.t == o.t

    def letters(self):
        out = set()
        for (p, tr, w) in self.t:
            out.update(p)
            out.update(w)
            for x in tr:
                out.update(x)
        return out

    def bracket(self, o):
        out: dict = {}
        for ka, ca in self.t.items():
            pa = _tpar(ka[1]) ^ _wpar(ka[2])
            for kb, cb in o.t.items():
                pb = _tpar(kb[1]) ^ _wpar(kb[2])
                for k, s in _lmul_term(ka, kb):
                    _acc(out, k, s * ca * cb)
                sgn = 1 if (pa and pb) else -1
                for k, s in _lmul_term(kb, ka):
                    _acc(out, k, sgn * s * ca * cb)
        return WLie(out)

    def pair(self, o):
        return trace(lmul(self, o)).scale(-2)


def _lmul_term(ka, kb):
    """Associative product of two Lie terms; yields (key, sign)."""
    pa, ta, wa = ka
    pb, tb, wb = kb
    sg0 = -1 if (_wpar(wa) and _tpar(tb)) else 1
    tr, sg = sort_traces(list(ta) + list(tb))
    if sg:
        yield (_merge_plain(pa, pb), tr, wa + wb), sg0 * sg


def lmul(a: WLie, b: WLie) -> WLie:
    out: dict = {}
    for ka, ca in a.t.items():
        for kb, cb in b.t.items():
            for k, s in _lmul_term(ka, kb):
                _acc(out, k, s * ca * cb)
    return WLie(out)


def trace(x: WLie) -> WScalar:
    out: dict = {}
    for (p, tr, w), c in x.t.items():
        if len(w) < 2:
            raise ValueError("trace of a single Lie letter is not supported")
        cw, s = canon_trace(w)
        if not s:
            continue
        tr2, s2 = sort_traces(list(tr) + [cw])
        if s2:
            _acc(out, (p, tr2), s * s2 * c)
    return WScalar(out)


def _word(w: tuple) -> WLie:
    return WLie({((), (), w): Q(1)})


class Words:
    name = "abstract"

    def lie(self, lid: int) -> WLie:
        return WLie({((), (), (lid,)): Q(1)})

    def scalar(self, lid: int) -> WScalar:
        if PAR[lid]:
            raise ValueError("odd plain scalars are not supported by the word backend")
        return WScalar({((lid,), ()): Q(1)})

    def const(self, c) -> WScalar:
        c = Q(c)
        return WScalar({((), ()): c} if c else {})

    def zero_s(self):
        return WScalar()

    def zero_l(self):
        return WLie()

    def is_lie(self, x) -> bool:
        return isinstance(x, WLie)

    # -- derivations and substitutions

    def derive(self, x, image, p: int = 0):
        cache: dict = {}

        def img(lid):
            if lid not in cache:
                cache[lid] = image(lid)
            return cache[lid]

        lie_out = isinstance(x, WLie)
        out = WLie() if lie_out else WScalar()
        for key, c in x.t.items():
            if lie_out:
                plain, traces, w = key
            else:
                plain, traces = key
                w = None
            # plain letters are even: no sign, image multiplies in front
            for i, v in enumerate(plain):
                y = img(v)
                if y:
                    rest = self._make(plain[:i] + plain[i + 1:], traces, w, c)
                    out.iadd(_smul_front(y, rest))
            before = 0
            for j, tw in enumerate(traces):
                for q, v in enumerate(tw):
                    y = img(v)
                    if y:
                        sg = -1 if (p and before & 1) else 1
                        t = _splice_trace(tw[:q], y, tw[q + 1:])
                        term = _assemble(plain, traces[:j], t, traces[j + 1:], w, sg * c)
                        out.iadd(term)
                    before ^= PAR[v]
            if w is not None:
                for q, v in enumerate(w):
                    y = img(v)
                    if y:
                        sg = -1 if (p and before & 1) else 1
                        mid = _splice_word(w[:q], y, w[q + 1:])
                        pre = WScalar({(plain, traces): Q(sg) * c})
                        out.iadd(pre * mid)
                    before ^= PAR[v]
        return out

    @staticmethod
    def _make(plain, traces, w, c):
        if w is None:
            return WScalar({(plain, traces): c})
        return WLie({(plain, traces, w): c})

    def subst(self, x, image):
        cache: dict = {}

        def img(lid):
            if lid not in cache:
                cache[lid] = image(lid)
            return cache[lid]

        lie_out = isinstance(x, WLie)
        out = WLie() if lie_out else WScalar()
        for key, c in x.t.items():
            if lie_out:
                plain, traces, w = key
            else:
                plain, traces = key
                w = None
            letters_here = set(plain)
            for tw in traces:
                letters_here.update(tw)
            if w:
                letters_here.update(w)
            if all(img(v) is None for v in letters_here):
                out.iadd(self._make(plain, traces, w, c))
                continue
            acc = WScalar({((), ()): c})
            for v in plain:
                y = img(v)
                acc = acc * (self.scalar(v) if y is None else y)
            for tw in traces:
                prod = None
                for v in tw:
                    y = img(v)
                    y = self.lie(v) if y is None else y
                    prod = y if prod is None else lmul(prod, y)
                acc = acc * trace(prod)
            if w is not None:
                prod = None
                for v in w:
                    y = img(v)
                    y = self.lie(v) if y is None else y
                    prod = y if prod is None else lmul(prod, y)
                out.iadd(acc * prod)
            else:
                out.iadd(acc)
        return out

    # -- partial derivatives of scalars

    def deriv(self, s: WScalar, lid: int, side: str = "L"):
        let = L.get(lid)
        if not let.lie:
            out: dict = {}
            for (plain, traces), c in s.t.items():
                k = plain.count(lid)
                if k:
                    i = plain.index(lid)
                    _acc(out, (plain[:i] + plain[i + 1:], traces), k * c)
            return WScalar(out)
        px = PAR[lid]
        out = {}
        for (plain, traces), c in s.t.items():
            for j, tw in enumerate(traces):
                if lid not in tw:
                    continue
                tj = _wpar(tw)
                rest = traces[:j] + traces[j + 1:]
                for q, v in enumerate(tw):
                    if v != lid:
                        continue
                    u, vv = tw[:q], tw[q + 1:]
                    if side == "L":
                        # Tr(u x v) = (-1)^{|u|(|x|+|v|)} Tr(x v u)
                        s1 = -1 if (_wpar(u) and (px ^ _wpar(vv))) else 1
                        s2 = -1 if (tj and _tpar(traces[:j])) else 1
                        V = vv + u
                        s3 = -1 if (_wpar(V) and _tpar(rest)) else 1
                        sg = s1 * s2 * s3
                    else:
                        # Tr(u x v) = (-1)^{|v|(|u|+|x|)} Tr(v u x)
                        s1 = -1 if (_wpar(vv) and (px ^ _wpar(u))) else 1
                        s2 = -1 if (tj and _tpar(traces[j + 1:])) else 1
                        V = vv + u
                        sg = s1 * s2
                    if not V:
                        raise ValueError("trace of a single Lie letter is not supported")
                    _acc(out, (plain, rest, V), -HALF * sg * c)
        return WLie(out)

    def letters(self, x) -> set:
        return x.letters()

    def filter(self, x, keep):
        """Terms whose letter-id list satisfies keep."""
        out = {}
        for k, c in x.t.items():
            ids = list(k[0])
            for tw in k[1]:
                ids.extend(tw)
            if len(k) > 2:
                ids.extend(k[2])
            if keep(ids):
                out[k] = c
        return type(x)(out)

    def size(self, x) -> int:
        return len(x)

    def key(self, x):
        return frozenset(x.t.items())

    def fmt(self, x) -> str:
        if not x.t:
            return "0"

        def wfmt(w):
            return " ".join(L.get(v).label() for v in w)

        def tkey(item):
            k = item[0]
            plain, traces = k[0], k[1]
            lab = [[L.sort_key(v) for v in tw] for tw in traces]
            return (len(plain) + sum(len(t) for t in traces), [L.sort_key(v) for v in plain], lab,
                    [L.sort_key(v) for v in k[2]] if len(k) > 2 else [])

        parts = []
        for k, c in sorted(x.t.items(), key=tkey):
            plain, traces = k[0], k[1]
            fac = [L.get(v).label() for v in plain]
            fac += ["Tr(" + wfmt(tw) + ")" for tw in traces]
            if len(k) > 2:
                fac.append("{" + wfmt(k[2]) + "}")
            body = "*".join(fac)
            if c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(fmt_coef(c) + "*" + body if body else fmt_coef(c))
        return " + ".join(parts).replace("+ -", "- ")


def _smul_front(y, rest):
    """y * rest where y is a scalar image of an even plain letter."""
    if isinstance(rest, WLie):
        return rest.rmul_scalar(y)
    return y * rest


def _splice_word(u: tuple, y: WLie, v: tuple) -> WLie:
    mid = y
    if u:
        mid = lmul(_word(u), mid)
    if v:
        mid = lmul(mid, _word(v))
    return mid


def _splice_trace(u: tuple, y: WLie, v: tuple) -> WScalar:
    return trace(_splice_word(u, y, v))


def _assemble(plain, left, t: WScalar, right, w, c):
    """c * plain * left_traces * t * right_traces [* w]."""
    out = WScalar({(plain, ()): Q(c)})
    if left:
        tr, s = sort_traces(list(left))
        out = out * WScalar({((), tr): Q(s)})
    out = out * t
    if right:
        tr, s = sort_traces(list(right))
        out = out * WScalar({((), tr): Q(s)})
    if w is not None:
        return out * _word(w)
    return out


def backend(name: str):
    if name == "su2":
        return Su2()
    if name == "abstract":
        return Words()
    raise ValueError(name)
