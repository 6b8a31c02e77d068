"""Functional calculus on local functionals.

A :class:`LocalFunctional` wraps a density living in the jet space of one
:class:`Context` (Lie backend plus the relations valid on a region).  An
integrated functional is a density taken modulo total derivatives; a
pointwise one (``pointwise=True``) is a local function of the jets at a
single point, e.g. ``A_mu(x)``.

Sign conventions.  Right derivatives act from the right, left derivatives
from the left, so for a monomial X*M with X odd, dL/dX = M and
dR/dX = (-1)^{|M|} M.  The anti-bracket is

    (F, G) = sum_i < dR F / dPhi^i , dL G / dPhi*_i > - < dR F / dPhi*_i , dL G / dPhi^i >

where the pairing <X, Y> = X^I Y^I contracts Lie indices.  A lower-index
field A_mu pairs with the upper-index antifield A*^mu, no metric involved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from .expr.num import Q
from functools import lru_cache

from .errors import (
    FieldDependentVariationUnsupported,
    MixedGrade,
    PsiContainsAntifields,
    SpaceMismatch,
    TargetMismatch,
    UnknownGenerator,
)
from .expr import letters as L
from .expr.jet import FIELDS, PARTNER, YM_ANTIFIELDS, YM_FIELDS, JetSpace, components, field_lid
from .expr.letters import DIM, ETA
from .expr.lie import backend

REGIONS = ("R", "U", "V", "M")
SCALAR_FIELDS = ("phi",)
VARIATION_NAMES = {"ym": ("a", "a2"), "scalar": ("phip", "phiq")}


class Context:
    """Backend and jet relations for one theory kind on one region.

    On R the cutoff equals one and the background is on shell; on U only
    the background field equation holds; V and M carry no relations.
    ``onshell_vars`` lists variation symbols obeying the linearized
    equation (needs an on-shell background).
    """

    def __init__(self, kind: str, algebra: str = "su2", region: str = "M", onshell_vars=()):
        if region not in REGIONS:
            raise ValueError(f"unknown region {region!r}")
        self.kind = kind
        self.algebra = algebra
        self.region = region
        self.onshell_vars = tuple(onshell_vars)
        self.B = backend(algebra)
        self.J = JetSpace(self.B, bg_onshell=region in ("R", "U") and kind == "ym",
                          onshell_vars=self.onshell_vars)
        self.cache: dict = {}
        if kind == "ym":
            self.fields = YM_FIELDS
            self.antifields = YM_ANTIFIELDS
        else:
            self.fields = SCALAR_FIELDS
            self.antifields = ()

    @property
    def key(self):
        return (self.kind, self.algebra, self.region, self.onshell_vars)

    def lam(self):
        """Cutoff function: the constant 1 on R, a free scalar elsewhere."""
        if self.region == "R":
            return self.B.const(1)
        return self.J.letter("lam")

    def zero(self):
        return self.B.zero_s()

    def dynamical(self) -> frozenset:
        return frozenset(self.fields) | frozenset(self.antifields)

    def __repr__(self):
        return f"Context{self.key}"


@lru_cache(maxsize=None)
def get_context(kind: str, algebra: str = "su2", region: str = "M", onshell_vars=()) -> Context:
    return Context(kind, algebra, region, tuple(onshell_vars))


@dataclass(eq=False)
class LocalFunctional:
    density: object
    ctx: Context
    support: str = "M"
    pointwise: bool = False
    memo: dict = field(default_factory=dict, repr=False)

    @property
    def B(self):
        return self.ctx.B

    def _same(self, other: "LocalFunctional"):
        if other.ctx is not self.ctx:
            raise SpaceMismatch(f"{self.ctx} vs {other.ctx}")
        if other.pointwise != self.pointwise:
            raise SpaceMismatch("cannot combine pointwise and integrated functionals")

    def _wrap(self, d, other=None):
        sup = self.support if other is None else join_support(self.support, other.support)
        return LocalFunctional(d, self.ctx, sup, self.pointwise)

    def __add__(self, other):
        self._same(other)
        return self._wrap(self.density + other.density, other)

    def __sub__(self, other):
        self._same(other)
        return self._wrap(self.density - other.density, other)

    def __neg__(self):
        return self._wrap(-self.density)

    def scale(self, c):
        return self._wrap(self.density.scale(Q(c)))

    def is_zero(self) -> bool:
        return self.density.is_zero()

    def size(self) -> int:
        return self.B.size(self.density)

    def parity(self):
        return density_parity(self.ctx, self.density)

    def ghost(self):
        return density_ghost(self.ctx, self.density)

    def __str__(self):
        return self.B.fmt(self.density)

    # euler derivatives are reused by repeated anti-brackets with the action
    def euler(self, name, idx, side):
        key = (name, idx, side)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = self.ctx.J.euler(self.density, name, idx, side)
        return hit


_ORDER = {"R": 0, "U": 1, "V": 2, "M": 3}


def join_support(a: str, b: str) -> str:
    return a if _ORDER[a] >= _ORDER[b] else b


def functional(ctx: Context, density, support: str = "M", pointwise: bool = False) -> LocalFunctional:
    return LocalFunctional(density, ctx, support, pointwise)


# ------------------------------------------------------------------ gradings


def _term_letters(ctx: Context, x):
    out = []
    B = ctx.B
    if B.name == "su2":
        polys = x.c if hasattr(x, "c") else (x,)
        for p in polys:
            for m in p.t:
                out.append([v >> 2 for v in m])
    else:
        for k in x.t:
            ids = list(k[0])
            for tw in k[1]:
                ids.extend(tw)
            if len(k) > 2:
                ids.extend(k[2])
            out.append(ids)
    return out


def _homog(ctx, x, fn, mod=None):
    vals = {sum(fn(L.get(i)) for i in ids) for ids in _term_letters(ctx, x)}
    if mod:
        vals = {v % mod for v in vals}
    if not vals:
        return 0
    if len(vals) > 1:
        raise MixedGrade(f"terms carry different gradings {sorted(vals)}")
    return vals.pop()


def density_parity(ctx, x) -> int:
    return _homog(ctx, x, lambda let: let.parity, 2)


def density_ghost(ctx, x) -> int:
    return _homog(ctx, x, lambda let: FIELDS.get(let.name, (0, 0, 0, 0))[3])


def field_degree_part(ctx: Context, x, deg: int):
    dyn = ctx.dynamical()
    return ctx.B.filter(x, lambda ids: sum(1 for i in ids if L.get(i).name in dyn) == deg)


def field_free_part(ctx: Context, x):
    return field_degree_part(ctx, x, 0)


# ------------------------------------------------------------------ derivatives


def _pair(B, x, y):
    if B.is_lie(x):
        return x.pair(y)
    return x * y


def _zero_like(ctx, name):
    return ctx.B.zero_l() if FIELDS[name][0] else ctx.B.zero_s()


def _check_gen(ctx, name):
    known = set(ctx.fields) | set(ctx.antifields)
    if ctx.kind == "ym":
        known |= {"Abar"}
    else:
        known |= {"phib"}
    if name not in known:
        raise UnknownGenerator(f"{name} is not a generator of the {ctx.kind} theory")


def fderiv(F: LocalFunctional, name: str, idx=(), side: str = "L"):
    """Variational derivative density dF/d gen_idx(x).

    Background generators (``Abar`` or ``phib``) are handled through a
    variation symbol: dF/dAbar_nu = E_{a_nu}(bg_vary(F, a)).
    """
    ctx = F.ctx
    _check_gen(ctx, name)
    if side not in ("L", "R"):
        raise ValueError("side must be 'L' or 'R'")
    idx = tuple(idx)
    if name in ("Abar", "phib"):
        v = Variation(VARIATION_NAMES[ctx.kind][1], "Abar" if ctx.kind == "ym" else "phibar")
        vd = bg_vary(F, v)
        return ctx.J.euler(vd.density, v.name, idx, "L")
    return F.euler(name, idx, side)


def partials(F: LocalFunctional, name: str, idx=(), side: str = "L") -> dict:
    """Jet multi-index -> partial derivative of a pointwise density."""
    return F.ctx.J.partials(F.density, name, tuple(idx), side)


def _pw_side(ctx, F, G, name, idx, pname):
    """sum_alpha < dR F/d name_(alpha), Dsym_alpha E^L_pname(G) > for pointwise F."""
    J = ctx.J
    parts = J.partials(F.density, name, idx, "R")
    if not parts:
        return None
    e = G.euler(pname, idx, "L")
    if e.is_zero():
        return None
    acc = None
    for alpha, d in parts.items():
        t = _pair(ctx.B, d, J.Dsym(alpha, e))
        acc = t if acc is None else acc + t
    return acc


def _pw_side_right(ctx, F, G, name, idx, pname):
    """sum_alpha < Dsym_alpha E^R_name(F), dL G/d pname_(alpha) > for pointwise G."""
    J = ctx.J
    parts = J.partials(G.density, pname, idx, "L")
    if not parts:
        return None
    e = F.euler(name, idx, "R")
    if e.is_zero():
        return None
    acc = None
    for alpha, d in parts.items():
        t = _pair(ctx.B, J.Dsym(alpha, e), d)
        acc = t if acc is None else acc + t
    return acc


def antibracket(F: LocalFunctional, G: LocalFunctional) -> LocalFunctional:
    ctx = F.ctx
    if G.ctx is not ctx:
        raise SpaceMismatch(f"{F.ctx} vs {G.ctx}")
    F.parity()
    G.parity()
    B = ctx.B
    acc = B.zero_s()
    if F.pointwise and G.pointwise:
        raise SpaceMismatch("anti-bracket of two pointwise functionals is not a density")
    for f, fs in zip(ctx.fields, ctx.antifields):
        for idx in components(f):
            for left, right, sg in ((f, fs, 1), (fs, f, -1)):
                if F.pointwise:
                    t = _pw_side(ctx, F, G, left, idx, right)
                elif G.pointwise:
                    t = _pw_side_right(ctx, F, G, left, idx, right)
                else:
                    a = F.euler(left, idx, "R")
                    if a.is_zero():
                        continue
                    b = G.euler(right, idx, "L")
                    if b.is_zero():
                        continue
                    t = _pair(B, a, b)
                if t is not None:
                    acc = acc + t if sg > 0 else acc - t
    return LocalFunctional(acc, ctx, join_support(F.support, G.support), F.pointwise or G.pointwise)


# ------------------------------------------------------------------ derivations


def apply_derivation(F: LocalFunctional, image, parity: int, tag=None) -> LocalFunctional:
    """Extend a map on jet coordinates to a graded derivation.

    ``image(lid)`` returns the image of a coordinate or None.  Results per
    coordinate are cached in the context under ``tag`` when given.
    """
    ctx = F.ctx
    if tag is not None:
        cache = ctx.cache.setdefault(tag, {})

        def img(lid):
            if lid in cache:
                return cache[lid]
            val = cache[lid] = image(lid)
            return val
    else:
        img = image
    d = ctx.B.derive(F.density, img, parity)
    return LocalFunctional(d, ctx, F.support, F.pointwise)


def jet_image(ctx: Context, base_fn, tag):
    """Coordinate map X_(alpha) -> Dsym_alpha(base(X)) for derivations commuting with D."""
    J = ctx.J

    def image(lid):
        let = L.get(lid)
        base = base_fn(let.name, let.idx)
        if base is None:
            return None
        return J.Dsym(let.jet, base)

    return image


def s0_images(ctx: Context, mutation=None):
    """Free BRST differential from its table of values on generators."""
    J = ctx.J
    B = ctx.B
    if ctx.kind != "ym":
        return lambda name, idx: None
    C = J.letter("C")
    flip = -1 if mutation == "table1_sign" else 1

    def box(x):
        acc = B.zero_l()
        for mu in range(DIM):
            acc = acc + J.D(mu, J.D(mu, x)).scale(ETA[mu])
        return acc

    def div_lower(name):
        acc = B.zero_l()
        for mu in range(DIM):
            acc = acc + J.D(mu, J.letter(name, (mu,))).scale(ETA[mu])
        return acc

    def div_upper(name):
        acc = B.zero_l()
        for mu in range(DIM):
            acc = acc + J.D(mu, J.letter(name, (mu,)))
        return acc

    def base(name, idx):
        if name == "A":
            return J.D(idx[0], C)
        if name == "Cb":
            return J.letter("B").scale(flip)
        if name == "As":
            mu = idx[0]
            return (J.plin("A", mu) - J.D(mu, J.letter("B"))).scale(ETA[mu])
        if name == "Bs":
            return J.letter("B") + div_lower("A") - J.letter("Cbs")
        if name == "Cs":
            return -box(J.letter("Cb")) - div_upper("As")
        if name == "Cbs":
            return box(C)
        return None

    return base


def s0_apply(F: LocalFunctional, theory=None) -> LocalFunctional:
    ctx = F.ctx
    mutation = getattr(theory, "mutation", None)
    base = s0_images(ctx, mutation)
    return apply_derivation(F, jet_image(ctx, base, ("s0", mutation)), 1, ("s0", mutation))


def s_apply(F: LocalFunctional, theory) -> LocalFunctional:
    S = theory.piece(F.ctx, "S")
    return antibracket(S, F)


def gauge_fix_conjugate(F: LocalFunctional, Psi: LocalFunctional, direction: str = "forward",
                        max_terms: int = 16) -> LocalFunctional:
    """exp(+-(-, Psi)) F, summed until the series stops."""
    ctx = F.ctx
    anti = set(ctx.antifields)
    if any(L.get(i).name in anti for i in ctx.B.letters(Psi.density)):
        raise PsiContainsAntifields("gauge-fixing fermion contains antifields")
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be forward or inverse")
    P = Psi if direction == "forward" else -Psi
    out = F
    term = F
    for k in range(1, max_terms + 1):
        term = antibracket(term, P).scale(Q(1, k))
        if term.is_zero():
            return out
        out = out + term
    raise RuntimeError("conjugation series did not terminate")


# ------------------------------------------------------------------ variations


@dataclass(frozen=True)
class Variation:
    """Constant variation symbol of a background field."""

    name: str
    target: str = "Abar"
    region: str = "M"
    on_shell: bool = False
    field_dependent: bool = False


def _check_target(ctx: Context, v: Variation):
    want = "Abar" if ctx.kind == "ym" else "phibar"
    if v.target != want or v.name not in VARIATION_NAMES[ctx.kind]:
        raise TargetMismatch(f"variation {v.name} of {v.target} does not fit the {ctx.kind} theory")
    if v.field_dependent:
        raise FieldDependentVariationUnsupported("variations must be constant symbols")


def _bg_image(ctx: Context, vname: str):
    """delta-bar on covariant jet coordinates for the YM background.

    dX_() = 0 and dX_(alpha) = 1/k sum_i ([a_{a_i}, X_(b_i)] + D_{a_i} dX_(b_i));
    Fbar itself moves by D_m a_n - D_n a_m with jets by the same recursion.
    """
    J = ctx.J
    B = ctx.B
    memo: dict = {}

    def vl(mu):
        return J.letter(vname, (mu,))

    def img(lid):
        if lid in memo:
            return memo[lid]
        let = L.get(lid)
        if not let.lie:
            val = None
        elif let.name == "F" and not let.jet:
            m, n = let.idx
            val = J.D(m, vl(n)) - J.D(n, vl(m))
        elif not let.jet:
            val = None
        else:
            k = len(let.jet)
            acc = B.zero_l()
            for i, a in enumerate(let.jet):
                lower = L.intern(let.with_jet(let.jet[:i] + let.jet[i + 1:]))
                acc = acc + vl(a).bracket(J.elem(lower))
                sub = img(lower)
                if sub is not None:
                    acc = acc + J.D(a, sub)
            val = acc.scale(Q(1, k))
        memo[lid] = val
        return val

    return img


def bg_vary(F: LocalFunctional, v: Variation) -> LocalFunctional:
    ctx = F.ctx
    _check_target(ctx, v)
    if ctx.kind == "ym":
        key = ("bgimg", v.name)
        img = ctx.cache.get(key)
        if img is None:
            img = ctx.cache[key] = _bg_image(ctx, v.name)
    else:
        def img(lid):
            let = L.get(lid)
            if let.name == "phib":
                return ctx.J.elem(field_lid(v.name, (), let.jet))
            return None
    return apply_derivation(F, img, 0, ("bg", v.name))


def dyn_vary(F: LocalFunctional, v: Variation) -> LocalFunctional:
    ctx = F.ctx
    _check_target(ctx, v)
    src = "A" if ctx.kind == "ym" else "phi"

    def img(lid):
        let = L.get(lid)
        if let.name == src:
            return ctx.J.elem(field_lid(v.name, let.idx, let.jet))
        return None

    return apply_derivation(F, img, 0, ("dyn", v.name))


def cD(F: LocalFunctional, v: Variation) -> LocalFunctional:
    return bg_vary(F, v) - dyn_vary(F, v)


def _psi(F, theory, Psi):
    if Psi is not None:
        return Psi
    return theory.piece(F.ctx, "Psi")


def cD0(F: LocalFunctional, v: Variation, theory=None, Psi=None) -> LocalFunctional:
    P = _psi(F, theory, Psi)
    return cD(F, v) + antibracket(F, dyn_vary(P, v))


def cDhat(F: LocalFunctional, v: Variation, theory=None, Psi=None) -> LocalFunctional:
    P = _psi(F, theory, Psi)
    out = cD(F, v)
    if getattr(theory, "mutation", None) == "dhat_no_correction":
        return out
    return out - antibracket(F, cD(P, v))


def lie_bracket(v1: Variation, v2: Variation):
    """Bracket of two variation vector fields; zero for constant symbols."""
    if v1.field_dependent or v2.field_dependent:
        raise FieldDependentVariationUnsupported("field dependent variations are not represented")
    return 0


# ------------------------------------------------------------------ null test


def null_residual(F: LocalFunctional) -> dict:
    """Obstructions to F being a total derivative (empty dict when null).

    A density is a total derivative when every Euler derivative by a
    dynamical field or antifield vanishes and its field-free part is zero
    (homotopy formula; the field-free test is sufficient, not necessary).
    """
    ctx = F.ctx
    J = ctx.J
    out = {}
    if F.pointwise:
        if not F.density.is_zero():
            out["density"] = F.density
        return out
    for name in ctx.fields + ctx.antifields:
        for idx in components(name):
            e = J.euler(F.density, name, idx, "L")
            if not e.is_zero():
                out[(name, idx)] = e
    free = field_free_part(ctx, F.density)
    if not free.is_zero():
        out["field_free"] = free
    return out


def is_null(F: LocalFunctional) -> bool:
    return not null_residual(F)


def residual_text(F: LocalFunctional, limit: int = 400) -> str:
    res = null_residual(F)
    if not res:
        return "0"
    parts = []
    for k, v in res.items():
        label = k if isinstance(k, str) else f"E_{k[0]}{''.join(map(str, k[1]))}"
        parts.append(f"{label}: {F.B.fmt(v)}")
    text = "; ".join(parts)
    return text if len(text) <= limit else text[:limit] + " ..."
