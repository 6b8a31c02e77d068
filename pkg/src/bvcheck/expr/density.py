"""Evaluation of GradedExpr on the jet space, and equality modulo total derivatives.

Evaluation expands every summed Lie label over {0, 1, 2} with f = epsilon
(the su(2) enumeration oracle) and every summed spacetime label over
{0, 1, 2, 3} with the flat metric.  Generators become jet coordinates,
ordered covariant derivatives become iterated total derivatives.  Two
expressions are identical iff their evaluations agree for every
assignment of the free labels.

``equal_density`` decides whether f - g is a total divergence by exact
linear algebra: the difference is evaluated, split by mass dimension and
field content, and tested for membership in the span of D_mu(m) over all
jet monomials m of one mass dimension less and bounded derivative order.
"""
from __future__ import annotations

from itertools import product

from ..errors import BasisOverflow, MalformedIndex, OrderExceeded, UnknownGenerator
from . import letters as L
from .graded import GENERATORS, GradedExpr, free_indices
from .jet import FIELDS, JetSpace, components, field_lid
from .letters import DIM, ETA
from .lie import backend
from .num import Q
from .poly import Poly

EPS = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}

DEFAULT_CAP = 20000


def oracle_space(bg_onshell: bool = False, onshell_vars=()) -> JetSpace:
    return JetSpace(backend("su2"), bg_onshell, onshell_vars)


def _gen_value(J: JetSpace, f, assign, cache):
    key = (f, tuple(sorted(assign.items())))
    hit = cache.get(key)
    if hit is not None:
        return hit
    jname, _, is_lie, native = GENERATORS[f.name][:4]
    if jname is None:
        raise UnknownGenerator(f"{f.name} has no jet-space realization")
    sign = 1
    idx = []
    for (l, p), nat in zip(f.slots, native):
        mu = assign[("s", l)]
        idx.append(mu)
        if p != nat:
            sign *= ETA[mu]
    if jname == "F":
        x = J.letter("F", tuple(idx))
    else:
        x = J.letter(jname, tuple(idx))
    for l, p in reversed(f.derivs):
        mu = assign[("s", l)]
        x = J.D(mu, x)
        if p == "^":
            sign *= ETA[mu]
    if is_lie:
        x = x.c[assign[("l", f.lie)]]
    if sign != 1:
        x = x.scale(sign)
    cache[key] = x
    return x


def evaluate(e: GradedExpr, J: JetSpace | None = None, params: dict | None = None) -> dict:
    """Map free-label assignment (sorted tuple) -> Poly over the su(2) jet space.

    The formal parameter m becomes the constant jet letter m; other
    parameters need numeric values in ``params``.
    """
    J = J or oracle_space()
    params = params or {}
    out: dict = {}
    cache: dict = {}
    if not e.terms:
        return out
    free = free_indices(e.terms[0])
    free_keys = [(ns, l) for ns, l, _ in free]
    ranges = [range(DIM) if ns == "s" else range(3) for ns, _ in free_keys]
    for t in e.terms:
        occ = {}
        for f in t.factors:
            for ns, l, _ in f.occurrences():
                occ[(ns, l)] = occ.get((ns, l), 0) + 1
        dummies = sorted(k for k, v in occ.items() if v == 2)
        dranges = [range(DIM) if ns == "s" else range(3) for ns, _ in dummies]
        base = Poly.const(t.coef)
        for name, k in t.params:
            if name == "m":
                v = Poly.var(field_lid("m") << 2)
            elif name in params:
                v = Poly.const(Q(params[name]))
            else:
                raise UnknownGenerator(f"parameter {name} needs a value for evaluation")
            for _ in range(k):
                base = base * v
        for fvals in product(*ranges):
            fa = dict(zip(free_keys, fvals))
            acc = out.get(fvals, Poly())
            for dvals in product(*dranges):
                assign = dict(fa)
                assign.update(zip(dummies, dvals))
                val = base
                for f in t.factors:
                    if f.kind == "gen":
                        x = _gen_value(J, f, assign, cache)
                    elif f.kind == "f":
                        c = EPS.get(tuple(assign[("l", l)] for l in f.slots), 0)
                        x = Poly.const(c) if c else None
                    elif f.kind == "kd":
                        a, b = (assign[("l", l)] for l in f.slots)
                        x = Poly.const(1) if a == b else None
                    else:
                        (l1, p1), (l2, p2) = f.slots
                        a, b = assign[("s", l1)], assign[("s", l2)]
                        if a != b:
                            x = None
                        else:
                            x = Poly.const(1 if p1 != p2 else ETA[a])
                    if x is None:
                        val = None
                        break
                    val = val * x
                    if not val:
                        break
                if val:
                    acc = acc + val
            out[fvals] = acc
    return {k: v for k, v in out.items() if v}


def oracle_equal(a: GradedExpr, b: GradedExpr, J: JetSpace | None = None) -> bool:
    """Pointwise identity of two expressions by su(2) and index enumeration."""
    return not evaluate(a - b, J)


def scalar_value(e: GradedExpr, J: JetSpace | None = None) -> Poly:
    if e.terms and free_indices(e.terms[0]):
        raise MalformedIndex("expression has free indices")
    return evaluate(e, J).get((), Poly())


# ---------------------------------------------------------------- total derivatives


def _letter_mass(lid: int) -> int:
    let = L.get(lid)
    return FIELDS[let.name][4] + let.order


def max_deriv_order(e: GradedExpr) -> int:
    return max((len(f.derivs) for t in e.terms for f in t.factors if f.kind == "gen"), default=0)


def _content(mono) -> tuple:
    """Multiset of non-curvature field names of a monomial (the part D preserves)."""
    return tuple(sorted(L.get(v >> 2).name for v in mono if L.get(v >> 2).name not in ("F", "m")))


def _mono_mass(mono) -> int:
    return sum(_letter_mass(v >> 2) for v in mono)


def _free_letters(J: JetSpace, name: str, order: int):
    """Non-principal jet variables (lid << 2 | comp) of a field up to an order."""
    from .jet import multi_indices

    out = []
    lie = FIELDS[name][0]
    for k in range(order + 1):
        for idx in components(name):
            for jet in multi_indices(k):
                lid = field_lid(name, idx, jet)
                if lid in J.red:
                    continue
                if lie:
                    out += [(lid << 2) | c for c in (1, 2, 3)]
                else:
                    out.append(lid << 2)
    return out


def _candidates(J, content, mass, order, cap):
    """Monomials with the given field content plus curvature letters, of total mass `mass`."""
    pools = {name: _free_letters(J, name, order) for name in set(content)}
    has_lie = any(FIELDS[n][0] for n in content)
    fpool = _free_letters(J, "F", max(order - 1, 0)) if has_lie else []
    base = sum(FIELDS[n][4] for n in content)
    budget = mass - base
    out = set()

    def rec(i, mono, left):
        if len(out) > cap:
            raise BasisOverflow(f"candidate basis above cap {cap}")
        if i == len(content):
            # top up with curvature letters
            rec_f(tuple(sorted(mono)), left, 0)
            return
        for v in pools[content[i]]:
            extra = L.get(v >> 2).order
            if extra > left:
                continue
            if L.PAR[v >> 2] and v in mono:
                continue
            rec(i + 1, mono + [v], left - extra)

    def rec_f(mono, left, start):
        if left == 0:
            out.add(mono)
            return
        for j in range(start, len(fpool)):
            v = fpool[j]
            m = _letter_mass(v >> 2)
            if m <= left:
                rec_f(tuple(sorted(mono + (v,))), left - m, j)

    if budget >= 0:
        rec(0, [], budget)
    return out


def _reduce(vec: dict, pivots: dict) -> dict:
    vec = dict(vec)
    while True:
        hit = [k for k in vec if k in pivots]
        if not hit:
            return vec
        k = max(hit)
        c = vec[k]
        for q, v in pivots[k].items():
            w = vec.get(q, 0) - c * v
            if w:
                vec[q] = w
            else:
                vec.pop(q, None)


def in_divergence_span(P: Poly, J: JetSpace, order: int, cap: int = DEFAULT_CAP) -> bool:
    """Exact membership of P in span{D_mu m} over bounded-order jet monomials."""
    if not P:
        return True
    groups: dict = {}
    for mono, c in P.t.items():
        groups.setdefault((_mono_mass(mono), _content(mono)), {})[mono] = c
    for (mass, content), target in sorted(groups.items()):
        cands = _candidates(J, list(content), mass - 1, order, cap)
        if DIM * len(cands) > cap:
            raise BasisOverflow(f"{DIM * len(cands)} unknowns above cap {cap}")
        pivots: dict = {}
        for mono in sorted(cands):
            m = Poly({mono: Q(1)})
            for mu in range(DIM):
                col = _reduce(J.D(mu, m).t, pivots)
                if not col:
                    continue
                k = max(col)
                c = col[k]
                col = {q: v / c for q, v in col.items()}
                for pk, pv in pivots.items():
                    if k in pv:
                        c2 = pv[k]
                        for q, v in col.items():
                            w = pv.get(q, 0) - c2 * v
                            if w:
                                pv[q] = w
                            else:
                                pv.pop(q, None)
                pivots[k] = col
        # the divergence of a candidate may leave the group; compare on all monomials
        rest = _reduce(target, pivots)
        if rest:
            return False
    return True


def equal_density(f: GradedExpr, g: GradedExpr, max_order: int, cap: int = DEFAULT_CAP,
                  J: JetSpace | None = None) -> bool:
    """True iff the densities f and g differ by a total divergence (bounded basis)."""
    for e in (f, g):
        if max_deriv_order(e) > max_order:
            raise OrderExceeded(f"derivative order {max_deriv_order(e)} above {max_order}")
        for t in e.terms:
            if free_indices(t):
                raise MalformedIndex("densities must have no free indices")
    J = J or oracle_space()
    P = scalar_value(f - g, J)
    return in_divergence_span(P, J, max_order, cap)


def equal_by_euler(f: GradedExpr, g: GradedExpr, kind: str = "auto") -> bool:
    """Second route: all Euler derivatives of f - g vanish and its field-free part is zero."""
    from ..funcalc import LocalFunctional, get_context, is_null

    diff = f - g
    names = {GENERATORS[fa.name][0] for t in diff.terms for fa in t.factors if fa.kind == "gen"}
    if kind == "auto":
        kind = "scalar" if names <= {"phi", "phib", "phip", "lam", None} else "ym"
    ctx = get_context(kind, "su2", "M", ())
    P = scalar_value(diff, ctx.J)
    return is_null(LocalFunctional(P, ctx, "M"))
