"""Graded symbolic expressions with abstract indices.

A GradedExpr is a sum of terms.  A term is an exact rational coefficient,
a monomial in the formal parameters (hbar, m, lambda0, coupling, dimg),
a volume-density flag and an ordered product of factors.  Factors are

* generators: a field, antifield or background symbol carrying an
  optional Lie label, spacetime slots and an ordered list of covariant
  derivative indices (outermost first);
* ``f``: structure constants with three Lie labels;
* ``g``: the spacetime metric, or the Kronecker delta when its two slots
  have opposite positions;
* ``kd``: the Kronecker delta on Lie labels.

Spacetime labels carry a position, ``"_"`` (lower) or ``"^"`` (upper).  A
label that occurs twice in a term is summed over; spacetime pairs must
have opposite positions.  Lie and spacetime labels live in separate
namespaces.

Canonical form.  ``normalize`` contracts metrics and deltas, expands
products of two structure constants into deltas when the algebra is
su(2) (f = epsilon), then picks for every term the smallest encoding over
all reorderings of interchangeable factors and all slot symmetries
(f totally antisymmetric, Fbar antisymmetric, g symmetric), renaming
dummies in order of first appearance.  Odd factors pay a Koszul sign
when reordered; a term that maps to itself with the opposite sign is 0.
Ordered covariant derivatives are kept as written; commuting them is a
rule (see :mod:`bvcheck.expr.rules`).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from ..errors import BasisOverflow, MalformedIndex, MixedGrade, UnknownGenerator
from .num import Q

# surface name: (jet name, kind, lie valued, native slot positions, parity, ghost, mass dim, field degree)
GENERATORS = {
    "A": ("A", "dyn_field", True, ("_",), 0, 0, 1, 1),
    "B": ("B", "dyn_field", True, (), 0, 0, 2, 1),
    "C": ("C", "dyn_field", True, (), 1, 1, 0, 1),
    "Cbar": ("Cb", "dyn_field", True, (), 1, -1, 2, 1),
    "As": ("As", "antifield", True, ("^",), 1, -1, 3, 1),
    "Bs": ("Bs", "antifield", True, (), 1, -1, 2, 1),
    "Cs": ("Cs", "antifield", True, (), 0, -2, 4, 1),
    "Cbars": ("Cbs", "antifield", True, (), 0, 0, 2, 1),
    "phi": ("phi", "dyn_field", False, (), 0, 0, 1, 1),
    "phibar": ("phib", "background_field", False, (), 0, 0, 1, 0),
    "Abar": (None, "background_field", True, ("_",), 0, 0, 1, 0),
    "Fbar": ("F", "background_field", True, ("_", "_"), 0, 0, 2, 0),
    "a": ("a", "background_variation", True, ("_",), 0, 0, 1, 0),
    "a2": ("a2", "background_variation", True, ("_",), 0, 0, 1, 0),
    "phip": ("phip", "background_variation", False, (), 0, 0, 1, 0),
    "lam": ("lam", "external_param", False, (), 0, 0, 0, 0),
    "T": (None, "external_param", False, (), 0, 0, 0, 0),
}

ALIASES = {
    "A‡": "As", "B‡": "Bs", "C‡": "Cs", "Cbar‡": "Cbars", "Cb": "Cbar", "Cbs": "Cbars",
    "lambda_cutoff": "lam", "a_var": "a", "test_tensor": "T", "F": "Fbar",
}

# formal parameters: mass dimension and hbar degree
PARAMS = {"hbar": (0, 1), "m": (1, 0), "lambda0": (0, 0), "coupling": (0, 0), "dimg": (0, 0)}

# worst case number of variants tried when canonicalizing one term
MAX_VARIANTS = 200000


def canonical_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in GENERATORS:
        raise UnknownGenerator(f"unknown generator {name!r}")
    return name


@dataclass(frozen=True)
class Factor:
    kind: str  # gen, f, g, kd
    name: str = ""
    lie: str | None = None
    slots: tuple = ()  # gen and g: ((label, pos), ...); f and kd: (label, ...)
    derivs: tuple = ()  # ((label, pos), ...), outermost first

    @property
    def parity(self) -> int:
        return GENERATORS[self.name][4] if self.kind == "gen" else 0

    def occurrences(self):
        """(namespace, label, position) for every index slot, in slot order."""
        if self.kind == "gen":
            out = []
            if self.lie is not None:
                out.append(("l", self.lie, None))
            out += [("s", l, p) for l, p in self.slots]
            out += [("s", l, p) for l, p in self.derivs]
            return out
        if self.kind == "g":
            return [("s", l, p) for l, p in self.slots]
        return [("l", l, None) for l in self.slots]

    def relabel(self, ren: dict) -> "Factor":
        """ren maps (namespace, label) -> new label."""
        if self.kind == "gen":
            lie = ren.get(("l", self.lie), self.lie) if self.lie is not None else None
            slots = tuple((ren.get(("s", l), l), p) for l, p in self.slots)
            derivs = tuple((ren.get(("s", l), l), p) for l, p in self.derivs)
            return Factor("gen", self.name, lie, slots, derivs)
        if self.kind == "g":
            return Factor("g", "", None, tuple((ren.get(("s", l), l), p) for l, p in self.slots))
        return Factor(self.kind, "", None, tuple(ren.get(("l", l), l) for l in self.slots))

    def shape_key(self, free=None):
        """Label-free key; only factors with equal keys are interchanged.

        Positions of summed spacetime labels are ignored when ``free`` is
        given (the metric is flat, so a contracted pair may swap them).
        """
        def pos(l, p):
            return p if free is None or ("s", l) in free else ""

        if self.kind == "gen":
            return (0, self.name, self.lie is not None,
                    tuple(pos(l, p) for l, p in self.slots), tuple(pos(l, p) for l, p in self.derivs))
        if self.kind == "f":
            return (1, "f")
        if self.kind == "g":
            return (2, "g", tuple(sorted(pos(l, p) for l, p in self.slots)))
        return (3, "kd")

    def with_positions(self, fn) -> "Factor":
        """Replace spacetime positions: fn(label, old position) -> new position."""
        if self.kind == "gen":
            return Factor("gen", self.name, self.lie, tuple((l, fn(l, p)) for l, p in self.slots),
                          tuple((l, fn(l, p)) for l, p in self.derivs))
        if self.kind == "g":
            return Factor("g", "", None, tuple((l, fn(l, p)) for l, p in self.slots))
        return self


def gen(name, lie=None, slots=(), derivs=()) -> Factor:
    name = canonical_name(name)
    _, _, is_lie, native, *_ = GENERATORS[name]
    if is_lie and lie is None:
        raise MalformedIndex(f"{name} needs a Lie label")
    if not is_lie and lie is not None:
        raise MalformedIndex(f"{name} carries no Lie label")
    if len(slots) != len(native):
        raise MalformedIndex(f"{name} takes {len(native)} spacetime slot(s), got {len(slots)}")
    for _, p in tuple(slots) + tuple(derivs):
        if p not in ("_", "^"):
            raise MalformedIndex(f"bad index position {p!r}")
    return Factor("gen", name, lie, tuple(slots), tuple(derivs))


@dataclass(frozen=True)
class Term:
    coef: Q
    params: tuple = ()  # sorted ((name, power), ...)
    vol: bool = False
    factors: tuple = ()

    def with_(self, **kw) -> "Term":
        d = dict(coef=self.coef, params=self.params, vol=self.vol, factors=self.factors)
        d.update(kw)
        return Term(**d)


def _mul_params(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for k, v in b:
        d[k] = d.get(k, 0) + v
    return tuple(sorted((k, v) for k, v in d.items() if v))


def index_census(factors) -> dict:
    """(namespace, label) -> list of positions, checking arity."""
    occ: dict = {}
    for f in factors:
        for ns, l, p in f.occurrences():
            occ.setdefault((ns, l), []).append(p)
    for (ns, l), ps in occ.items():
        if len(ps) > 2:
            raise MalformedIndex(f"index {l} occurs {len(ps)} times")
        if ns == "s" and len(ps) == 2 and ps[0] == ps[1]:
            raise MalformedIndex(f"index {l} contracted with equal positions")
    return occ


def free_indices(t: Term) -> tuple:
    occ = index_census(t.factors)
    out = []
    for (ns, l), ps in occ.items():
        if len(ps) == 1:
            out.append((ns, l, ps[0]))
    return tuple(sorted(out, key=lambda x: (x[0], x[1], x[2] or "")))


def term_grade(t: Term) -> tuple:
    """(ghost, parity, mass_dim, deg_field, deg_hbar) of one term."""
    ghost = par = deg = hb = 0
    mass = Q(0)
    for f in t.factors:
        if f.kind != "gen":
            continue
        _, _, _, _, p, g, md, fd = GENERATORS[f.name]
        ghost += g
        par ^= p
        mass += md + len(f.derivs)
        deg += fd
    for name, k in t.params:
        mass += PARAMS[name][0] * k
        hb += PARAMS[name][1] * k
    return ghost, par, mass, deg, hb


class GradedExpr:
    """Immutable sum of terms; see the module docstring."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        terms = tuple(t for t in terms if t.coef != 0)
        self.terms = terms
        self._check()

    def _check(self):
        if not self.terms:
            return
        first = self.terms[0]
        fi = free_indices(first)
        g0 = term_grade(first)
        for t in self.terms[1:]:
            if free_indices(t) != fi:
                raise MalformedIndex("free indices differ between terms")
            g = term_grade(t)
            if g[:2] != g0[:2]:
                raise MixedGrade(f"terms of ghost/parity {g0[:2]} and {g[:2]} in one sum")
            if t.vol != first.vol:
                raise MixedGrade("densities and scalars mixed in one sum")

    # construction helpers
    @staticmethod
    def const(c) -> "GradedExpr":
        return GradedExpr((Term(Q(c)),))

    @staticmethod
    def param(name: str) -> "GradedExpr":
        if name not in PARAMS:
            raise UnknownGenerator(f"unknown parameter {name!r}")
        return GradedExpr((Term(Q(1), ((name, 1),)),))

    @staticmethod
    def factor(f: Factor) -> "GradedExpr":
        index_census((f,))
        return GradedExpr((Term(Q(1), (), False, (f,)),))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, o):
        return isinstance(o, GradedExpr) and self.terms == o.terms

    def __hash__(self):
        return hash(self.terms)

    def __add__(self, o: "GradedExpr") -> "GradedExpr":
        return GradedExpr(self.terms + o.terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "GradedExpr":
        c = Q(c)
        return GradedExpr(t.with_(coef=t.coef * c) for t in self.terms)

    def __mul__(self, o: "GradedExpr") -> "GradedExpr":
        return mul(self, o)

    def vol(self) -> "GradedExpr":
        return GradedExpr(t.with_(vol=True) for t in self.terms)

    def __repr__(self):
        from .sexpr import to_text

        return f"GradedExpr({to_text(self)!r})"


# ---------------------------------------------------------------- products


def _labels(t: Term) -> set:
    return {(ns, l) for f in t.factors for ns, l, _ in f.occurrences()}


def _dummies(t: Term) -> set:
    occ = index_census(t.factors)
    return {k for k, ps in occ.items() if len(ps) == 2}


def _fresh(ns: str, taken: set, stem: str | None = None):
    stem = stem or ("r" if ns == "s" else "K")
    i = 1
    while (ns, f"{stem}{i}") in taken:
        i += 1
    return f"{stem}{i}"


def rename_apart(t: Term, avoid: set) -> Term:
    """Rename the dummies of t so that none of them is in avoid."""
    ren = {}
    taken = set(avoid) | _labels(t)
    for key in sorted(_dummies(t)):
        if key in avoid:
            new = _fresh(key[0], taken)
            taken.add((key[0], new))
            ren[key] = new
    if not ren:
        return t
    return t.with_(factors=tuple(f.relabel(ren) for f in t.factors))


def concat_terms(a: Term, b: Term) -> Term:
    if a.vol and b.vol:
        raise MixedGrade("product of two densities")
    return Term(a.coef * b.coef, _mul_params(a.params, b.params), a.vol or b.vol, a.factors + b.factors)


def mul(x: GradedExpr, y: GradedExpr) -> GradedExpr:
    """Product with the dummies of each side renamed apart first."""
    out = []
    for a in x.terms:
        for b in y.terms:
            b2 = rename_apart(b, _labels(a))
            a2 = rename_apart(a, _labels(b2))
            out.append(concat_terms(a2, b2))
    return GradedExpr(out)


def raw_mul(x: GradedExpr, y: GradedExpr) -> GradedExpr:
    """Product with labels shared between the factors (used by the parser)."""
    return GradedExpr(concat_terms(a, b) for a in x.terms for b in y.terms)


def derivative(label: str, pos: str, x: GradedExpr, rename: bool = True) -> GradedExpr:
    """Covariant derivative by Leibniz; constants and structure tensors are annihilated."""
    out = []
    for t in x.terms:
        if rename:
            t = rename_apart(t, {("s", label)})
        for k, f in enumerate(t.factors):
            if f.kind != "gen":
                continue
            nf = Factor("gen", f.name, f.lie, f.slots, ((label, pos),) + f.derivs)
            out.append(t.with_(factors=t.factors[:k] + (nf,) + t.factors[k + 1:]))
    return GradedExpr(out)


def term_expr(t: Term) -> GradedExpr:
    return GradedExpr((t,))


# ---------------------------------------------------------------- free BRST differential


def _D(label, pos, x):
    return derivative(label, pos, x)


def _g(name, lie=None, slots=()):
    return GradedExpr.factor(gen(name, lie, slots))


def _box(x, taken):
    r = _fresh("s", taken)
    return derivative(r, "^", derivative(r, "_", x, False), False)


def s0_generator(f: Factor) -> GradedExpr:
    """Free BRST differential of one generator occurrence (commutes with the derivatives)."""
    name, I = f.name, f.lie
    taken = {(ns, l) for ns, l, _ in f.occurrences()}
    if name == "A":
        (mu, p), = f.slots
        base = _D(mu, p, _g("C", I))
    elif name == "Cbar":
        base = _g("B", I)
    elif name == "As":
        (mu, p), = f.slots
        r = _fresh("s", taken)
        taken.add(("s", r))
        J = _fresh("l", taken | {("l", I)})
        K = _fresh("l", taken | {("l", I), ("l", J)})
        t1 = derivative(r, "_", derivative(r, "^", _g("A", I, ((mu, p),)), False), False)
        t2 = derivative(r, "_", derivative(mu, p, _g("A", I, ((r, "^"),)), False), False)
        t3 = raw_mul(raw_mul(GradedExpr.factor(Factor("f", slots=(I, J, K))),
                             _g("Fbar", J, ((mu, p), (r, "_")))), _g("A", K, ((r, "^"),)))
        t4 = derivative(mu, p, _g("B", I), False)
        base = t1 - t2 + t3 - t4
    elif name == "Bs":
        r = _fresh("s", taken)
        base = _g("B", I) + derivative(r, "^", _g("A", I, ((r, "_"),)), False) - _g("Cbars", I)
    elif name == "Cs":
        r = _fresh("s", taken)
        base = -_box(_g("Cbar", I), taken) - derivative(r, "_", _g("As", I, ((r, "^"),)), False)
    elif name == "Cbars":
        base = _box(_g("C", I), taken)
    else:
        return GradedExpr()
    for label, pos in reversed(f.derivs):
        base = derivative(label, pos, base)
    return base


def s0(x: GradedExpr) -> GradedExpr:
    """Free BRST differential as an odd derivation acting from the left."""
    out = GradedExpr()
    for t in x.terms:
        sign = 1
        for k, f in enumerate(t.factors):
            img = s0_generator(f) if f.kind == "gen" else GradedExpr()
            if not img.is_zero():
                pre = Term(t.coef * sign, t.params, False, t.factors[:k])
                post = Term(Q(1), (), False, t.factors[k + 1:])
                piece = raw_mul(raw_mul(term_expr(pre), _rename_against(img, t, k)), term_expr(post))
                out = out + (piece.vol() if t.vol else piece)
            if f.parity:
                sign = -sign
    return out


def _rename_against(img: GradedExpr, t: Term, k: int) -> GradedExpr:
    """Rename dummies of img away from every label of the host term except factor k's free ones."""
    host = set()
    for j, f in enumerate(t.factors):
        if j != k:
            host |= {(ns, l) for ns, l, _ in f.occurrences()}
    return GradedExpr(rename_apart(s, host) for s in img.terms)


# ---------------------------------------------------------------- normalize


def _contract(t: Term, algebra: str):
    """Eliminate metrics and deltas contracted with other slots; returns a Term or None."""
    factors = list(t.factors)
    coef = t.coef
    params = t.params
    changed = True
    while changed:
        changed = False
        for k, f in enumerate(factors):
            if f.kind not in ("g", "kd"):
                continue
            ns = "s" if f.kind == "g" else "l"
            if f.kind == "g":
                (l1, p1), (l2, p2) = f.slots
            else:
                (l1, l2), p1, p2 = f.slots, None, None
            if l1 == l2:
                if f.kind == "g":
                    if p1 == p2:
                        raise MalformedIndex(f"metric trace over equal positions {l1}")
                    coef *= 4
                elif algebra == "su2":
                    coef *= 3
                else:
                    params = _mul_params(params, (("dimg", 1),))
                del factors[k]
                changed = True
                break
            for mine, other in (((l1, p1), (l2, p2)), ((l2, p2), (l1, p1))):
                hit = None
                for j, h in enumerate(factors):
                    if j == k:
                        continue
                    for a, b, c in h.occurrences():
                        if a == ns and b == mine[0]:
                            hit = (j, c)
                    if hit:
                        break
                if hit is None:
                    continue
                j, pos = hit
                if ns == "s" and pos == mine[1]:
                    raise MalformedIndex(f"index {mine[0]} contracted with equal positions")
                h = factors[j]
                if h.kind == "gen":
                    slots = tuple((other[0], other[1]) if (l == mine[0]) else (l, p) for l, p in h.slots)
                    derivs = tuple((other[0], other[1]) if (l == mine[0]) else (l, p) for l, p in h.derivs)
                    lie = other[0] if (ns == "l" and h.lie == mine[0]) else h.lie
                    if ns == "s":
                        nh = Factor("gen", h.name, h.lie, slots, derivs)
                    else:
                        nh = Factor("gen", h.name, lie, h.slots, h.derivs)
                elif h.kind == "g":
                    nh = Factor("g", "", None, tuple((other[0], other[1]) if l == mine[0] else (l, p)
                                                    for l, p in h.slots))
                else:
                    nh = Factor(h.kind, "", None, tuple(other[0] if l == mine[0] else l for l in h.slots))
                factors[j] = nh
                del factors[k]
                changed = True
                break
            if changed:
                break
    return Term(coef, params, t.vol, tuple(factors))


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _expand_eps_pairs(t: Term) -> list:
    """su(2): replace a product of two epsilons by the determinant of deltas."""
    fs = [k for k, f in enumerate(t.factors) if f.kind == "f"]
    if len(fs) < 2:
        return [t]
    a, b = fs[0], fs[1]
    A, Bv = t.factors[a].slots, t.factors[b].slots
    rest = [f for k, f in enumerate(t.factors) if k not in (a, b)]
    out = []
    for p in permutations(range(3)):
        ds = tuple(Factor("kd", "", None, (A[i], Bv[p[i]])) for i in range(3))
        out.append(Term(t.coef * _perm_sign(p), t.params, t.vol, tuple(rest) + ds))
    return out


def _variants(f: Factor):
    """(factor, sign) over the slot symmetries of one factor."""
    if f.kind == "f":
        for p in permutations(range(3)):
            yield Factor("f", "", None, tuple(f.slots[i] for i in p)), _perm_sign(p)
    elif f.kind in ("kd", "g"):
        yield f, 1
        yield Factor(f.kind, "", None, (f.slots[1], f.slots[0])), 1
    elif f.kind == "gen" and f.name == "Fbar":
        yield f, 1
        yield Factor("gen", f.name, f.lie, (f.slots[1], f.slots[0]), f.derivs), -1
    else:
        yield f, 1


def _encode(factors, free: set):
    """Encoding with dummies numbered by first appearance."""
    num = {}
    counters = {"s": 0, "l": 0}
    enc = []
    for f in factors:
        labs = []
        for ns, l, p in f.occurrences():
            if (ns, l) in free:
                labs.append((1, l, p or ""))
            else:
                key = (ns, l)
                if key not in num:
                    num[key] = counters[ns]
                    counters[ns] += 1
                labs.append((0, str(num[key]).zfill(4), ""))
        enc.append((f.shape_key(free), tuple(labs)))
    return tuple(enc), num


def _koszul(order, factors) -> int:
    odd = [i for i in order if factors[i].parity]
    return _perm_sign(sorted(range(len(odd)), key=lambda j: odd[j]))


def _canon_term(t: Term):
    """(canonical Term) or None if the term vanishes by symmetry."""
    factors = t.factors
    n = len(factors)
    free = {(ns, l) for ns, l, _ in free_indices(t)}
    order0 = sorted(range(n), key=lambda i: factors[i].shape_key(free))
    blocks = []
    for i in order0:
        if blocks and factors[blocks[-1][0]].shape_key(free) == factors[i].shape_key(free):
            blocks[-1].append(i)
        else:
            blocks.append([i])
    count = 1
    for b in blocks:
        for k in range(2, len(b) + 1):
            count *= k
        for i in b:
            count *= len(list(_variants(factors[i])))
    if count > MAX_VARIANTS:
        raise BasisOverflow(f"{count} symmetry variants for one term")
    var_lists = [list(_variants(f)) for f in factors]
    best = None
    best_signs = set()
    best_payload = None
    for perms in product(*[permutations(b) for b in blocks]):
        order = [i for p in perms for i in p]
        ks = _koszul(order, factors)
        for choice in product(*[var_lists[i] for i in order]):
            fs = [c[0] for c in choice]
            sign = ks
            for c in choice:
                sign *= c[1]
            enc, num = _encode(fs, free)
            if best is None or enc < best:
                best, best_signs, best_payload = enc, {sign}, (fs, num, sign)
            elif enc == best:
                best_signs.add(sign)
    if len(best_signs) > 1:
        return None
    fs, num, sign = best_payload
    taken = {l for _, l in free}
    ren = {}
    for key, i in sorted(num.items(), key=lambda kv: (kv[0][0], kv[1])):
        ns = key[0]
        stem = "m" if ns == "s" else "L"
        j = i + 1
        while f"{stem}{j}" in taken:
            j += 1000
        ren[key] = f"{stem}{j}"
    # summed spacetime pairs: upper at the first occurrence, lower at the second
    seen = set()

    def place(l, p):
        if ("s", l) in free:
            return p
        if l in seen:
            return "_"
        seen.add(l)
        return "^"

    fs = tuple(f.with_positions(place).relabel(ren) for f in fs)
    return Term(t.coef * sign, t.params, t.vol, fs)


def normalize(e: GradedExpr, algebra: str = "abstract") -> GradedExpr:
    """Canonical form; idempotent and deterministic."""
    work = list(e.terms)
    done = []
    while work:
        t = work.pop()
        index_census(t.factors)
        t = _contract(t, algebra)
        if algebra == "su2" and sum(1 for f in t.factors if f.kind == "f") >= 2:
            work.extend(_expand_eps_pairs(t))
            continue
        done.append(t)
    acc: dict = {}
    fi = None
    for t in done:
        c = _canon_term(t)
        if c is None:
            continue
        f = free_indices(c)
        if fi is None:
            fi = f
        elif f != fi:
            raise MalformedIndex("free indices differ between terms")
        key = (c.params, c.vol, c.factors)
        acc[key] = acc.get(key, 0) + c.coef
    terms = [Term(Q(v), k[0], k[1], k[2]) for k, v in acc.items() if v != 0]
    terms.sort(key=_term_sort_key)
    return GradedExpr(terms)


def _term_sort_key(t: Term):
    enc = tuple((f.shape_key(), f.lie or "", f.slots, f.derivs, f.name) for f in t.factors)
    return (len(t.factors), repr(enc), t.params)


# ---------------------------------------------------------------- grading


@dataclass(frozen=True)
class Grading:
    ghost: int
    mass_dim: Q
    parity: int
    deg_field: int
    deg_hbar: int

    @property
    def Deg(self) -> int:
        return 2 * self.deg_hbar + self.deg_field

    def __add__(self, o: "Grading") -> "Grading":
        return Grading(self.ghost + o.ghost, self.mass_dim + o.mass_dim, (self.parity + o.parity) % 2,
                       self.deg_field + o.deg_field, self.deg_hbar + o.deg_hbar)

    def as_dict(self) -> dict:
        return {"ghost": self.ghost, "mass_dim": str(self.mass_dim),
                "parity": "odd" if self.parity else "even",
                "deg_field": self.deg_field, "deg_hbar": self.deg_hbar, "Deg": self.Deg}


def grade_of(e: GradedExpr) -> Grading:
    """The unique grading of a nonzero homogeneous expression."""
    e = normalize(e)
    if e.is_zero():
        raise MixedGrade("the zero expression has no unique grading")
    gs = {term_grade(t) for t in e.terms}
    if len(gs) > 1:
        raise MixedGrade(f"inhomogeneous expression: {sorted(gs, key=str)}")
    ghost, par, mass, deg, hb = gs.pop()
    return Grading(ghost, Q(mass), par, deg, hb)
