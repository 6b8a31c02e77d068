"""Symbolic suites: exact identities of the classical BV machinery.

Each suite runs in every selected Lie backend and passes only if it
passes in all of them; disagreement between backends is reported.
"""
from __future__ import annotations

from ..expr import letters as L
from ..expr.density import evaluate
from ..expr.graded import free_indices, normalize, s0 as expr_s0
from ..expr.jet import FIELDS, PARTNER, YM_ANTIFIELDS, YM_FIELDS, components
from ..expr.letters import DIM, ETA
from ..expr.num import Q
from ..expr.rules import apply_rules
from ..expr.sexpr import parse, to_text
from ..funcalc import (
    LocalFunctional,
    Variation,
    antibracket,
    bg_vary,
    cD,
    cDhat,
    dyn_vary,
    get_context,
    is_null,
    jet_image,
    residual_text,
    s0_images,
    s_apply,
)
from ..models import build_scalar_theory, build_ym_theory, s_local
from .randfun import ANTI_NAMES, FIELD_NAMES, SHAPES, draw, instantiate
from .registry import Outcome, Randomization, suite

GAUGE = ("ym",)
A1 = Variation("a")
A2 = Variation("a2")


def _combine(per_backend: dict) -> Outcome:
    """Merge per-backend outcomes; all must pass, verdicts must agree."""
    oks = {alg: o.ok for alg, o in per_backend.items()}
    details = {alg: o.details for alg, o in per_backend.items() if o.details}
    if len(set(oks.values())) > 1:
        details["backend_verdicts"] = oks
    bad = [o for o in per_backend.values() if not o.ok]
    if bad:
        return Outcome(False, bad[0].residual, details)
    first = next(iter(per_backend.values()))
    return Outcome(True, first.residual, details)


def _per_backend(rc, fn) -> Outcome:
    return _combine({alg: fn(alg) for alg in rc.algebras})


def _null_outcome(R, label="") -> Outcome:
    if is_null(R):
        return Outcome(True)
    return Outcome(False, (label + ": " if label else "") + residual_text(R))


def _theory(alg, rc):
    return build_ym_theory(alg, mutation=rc.mutation)


# ------------------------------------------------------------------ action level


@suite("master_equation", "The anti-bracket of the gauge-fixed action with itself is a total "
       "derivative where the cutoff is one and the background solves its field equation.", GAUGE)
def master_equation(rc):
    def one(alg):
        th = _theory(alg, rc)
        S = th.piece(th.context("R"), "S")
        return _null_outcome(antibracket(S, S), "(S,S)")

    return _per_backend(rc, one)


@suite("scalar_split", "Scalar model: the background derivative of the action equals the dynamical "
       "derivative of the interaction, the quadratic part has the expected linearized operator, and "
       "zero coupling leaves no interaction.")
def scalar_split(rc):
    def one(alg):
        th = build_scalar_theory(mutation=rc.mutation)
        ctx = get_context("scalar", alg, "M", ())
        J, B = ctx.J, ctx.B
        S, S0, Sint = (th.piece(ctx, k) for k in ("S", "S0", "S_int"))
        v = Variation("phip", "phibar")
        split = bg_vary(S, v) - dyn_vary(Sint, v)
        if not is_null(split):
            return Outcome(False, "split: " + residual_text(split))
        phi, phib, m, lam = (J.letter(n) for n in ("phi", "phib", "m", "lam"))
        box = B.zero_s()
        for mu in range(DIM):
            box = box + J.D(mu, J.D(mu, phi)).scale(ETA[mu])
        expect = box - (m * m + (lam * phib * phib).scale(Q(1, 2))) * phi
        lin = S0.euler("phi", (), "L") - expect
        if not lin.is_zero():
            return Outcome(False, "linearized operator: " + B.fmt(lin)[:400])
        free = build_scalar_theory(coupling=0)
        fint = free.piece(ctx, "S_int")
        if not fint.is_zero():
            return Outcome(False, "free theory keeps an interaction")
        return Outcome(True)

    return _per_backend(rc, one)


@suite("ym_shift_prop", "On an on-shell background with an on-shell variation, the background "
       "variation of the gauge-fixed action minus the dynamical variation of its interaction equals "
       "s applied to the background variation of the gauge-fixing fermion.", GAUGE)
def ym_shift_prop(rc):
    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("R", ("a",))
        S, Sint, Psi = (th.piece(ctx, k) for k in ("S", "S_int", "Psi"))
        R = bg_vary(S, A1) - dyn_vary(Sint, A1) - s_apply(bg_vary(Psi, A1), th)
        return _null_outcome(R)

    return _per_backend(rc, one)


@suite("cD_S_corollary", "On the same region, the connection applied to the action is s-exact: "
       "it equals s of the connection applied to the gauge-fixing fermion.", GAUGE)
def cd_s_corollary(rc):
    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("R", ("a",))
        S, Psi = th.piece(ctx, "S"), th.piece(ctx, "Psi")
        R = cD(S, A1) - s_apply(cD(Psi, A1), th)
        return _null_outcome(R)

    return _per_backend(rc, one)


# ------------------------------------------------------------------ D-hat


def _dhat_suite(rc, which: str) -> Outcome:
    n_trials = rc.trials("dhat")
    shapes = tuple(s for s, d in SHAPES.items() if d <= rc.cfg["max_field_degree"])
    max_deriv = rc.cfg["max_deriv"]
    nfun = 2 if which == "leib" else 1

    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("R", ("a",)) if which == "comm" else th.context("M")
        rng = rc.rng(which)
        done = 0
        tries = 0
        while done < n_trials:
            tries += 1
            if tries > 50 * n_trials:
                return Outcome(False, f"only {done} nontrivial draws in {tries} tries")
            specs = [draw(rng, max_deriv, shapes) for _ in range(nfun)]
            Fs = [instantiate(s, ctx) for s in specs]
            if any(F.is_zero() for F in Fs):
                continue
            if which == "leib":
                F1, F2 = Fs
                X = antibracket(F1, F2)
                if X.is_zero():
                    continue
                R = cDhat(X, A1, th) - antibracket(cDhat(F1, A1, th), F2) - antibracket(F1, cDhat(F2, A1, th))
            elif which == "comm":
                (F,) = Fs
                R = cDhat(s_apply(F, th), A1, th) - s_apply(cDhat(F, A1, th), th)
            else:
                (F,) = Fs
                R = cDhat(cDhat(F, A2, th), A1, th) - cDhat(cDhat(F, A1, th), A2, th)
            done += 1
            if not is_null(R):
                label = " ; ".join(s.text() for s in specs)
                return Outcome(False, f"trial {done} [{label}]: {residual_text(R)}",
                               {"trials": done})
        return Outcome(True, "0", {"trials": done})

    return _per_backend(rc, one)


_RAND = Randomization(trials=20, max_degree=4, max_deriv=2)


@suite("dhat_leibniz", "The corrected connection is a derivation of the anti-bracket, checked on "
       "random local functionals.", GAUGE, randomization=_RAND)
def dhat_leibniz(rc):
    return _dhat_suite(rc, "leib")


@suite("dhat_commutes_s", "On functionals supported where the cutoff is one, the corrected "
       "connection commutes with s.", GAUGE, randomization=_RAND)
def dhat_commutes_s(rc):
    return _dhat_suite(rc, "comm")


@suite("dhat_flat", "The corrected connection has zero curvature: variations along two "
       "directions commute.", GAUGE, randomization=_RAND)
def dhat_flat(rc):
    return _dhat_suite(rc, "flat")


# ------------------------------------------------------------------ anti-bracket algebra


def _sgn(e):
    return -1 if e % 2 else 1


@suite("jacobi", "The anti-bracket is graded antisymmetric and satisfies the graded Jacobi "
       "identity on random local functionals.", GAUGE,
       randomization=Randomization(trials=50, max_degree=4, max_deriv=2))
def jacobi(rc):
    n_trials = rc.trials("jacobi")
    names = FIELD_NAMES + ANTI_NAMES
    shapes = tuple(s for s, d in SHAPES.items() if d <= min(3, rc.cfg["max_field_degree"]))

    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("M")
        rng = rc.rng("jacobi")
        done = tries = 0
        while done < n_trials:
            tries += 1
            if tries > 50 * n_trials:
                return Outcome(False, f"only {done} nontrivial draws")
            specs = [draw(rng, 1, shapes, names) for _ in range(3)]
            F, G, H = (instantiate(s, ctx) for s in specs)
            if F.is_zero() or G.is_zero() or H.is_zero():
                continue
            eF, eG = F.parity(), G.parity()
            FG = antibracket(F, G)
            GH = antibracket(G, H)
            FH = antibracket(F, H)
            if FG.is_zero() and GH.is_zero() and FH.is_zero():
                continue
            done += 1
            sym = FG + antibracket(G, F).scale(_sgn((eF + 1) * (eG + 1)))
            jac = (antibracket(F, GH) - antibracket(FG, H)
                   - antibracket(G, FH).scale(_sgn((eF + 1) * (eG + 1))))
            label = " ; ".join(s.text() for s in specs)
            for what, R in (("symmetry", sym), ("jacobi", jac)):
                if not is_null(R):
                    return Outcome(False, f"{what} trial {done} [{label}]: {residual_text(R)}")
        return Outcome(True, "0", {"trials": done})

    return _per_backend(rc, one)


# ------------------------------------------------------------------ free BRST differential


def _probe(J):
    """Even Lie-valued constant used to turn Lie-valued expressions into scalars."""
    return J.letter("a", (0,))


_EXPR_TEXT = {
    "A": "(A I _m)", "B": "(B I)", "C": "(C I)", "Cb": "(Cbar I)",
    "As": "(As I ^m)", "Bs": "(Bs I)", "Cs": "(Cs I)", "Cbs": "(Cbars I)",
}


def _expr_route_mismatch(ctx, table) -> list:
    """Generators where the expression-layer s0, evaluated in su(2), differs from the table."""
    bad = []
    for name, text in _EXPR_TEXT.items():
        e = normalize(expr_s0(parse(text)), "su2")
        val = evaluate(e, ctx.J)
        frees = free_indices(e.terms[0]) if e.terms else ()
        for idx in components(name):
            want = table(name, idx)
            for comp in range(3):
                key = tuple(comp if ns == "l" else idx[0] for ns, _, _ in frees)
                got = val.get(key)
                w = None if want is None else want.c[comp]
                if (got is None or got.is_zero()) and (w is None or w.is_zero()):
                    continue
                if got is None or w is None or not (got - w).is_zero():
                    bad.append(f"{name}{idx}[{comp}]")
    return bad


@suite("s0_table_crosscheck", "The table of free BRST transformations agrees with the anti-bracket "
       "with the free action on every field and antifield, and with the expression-layer s0.", GAUGE)
def s0_table_crosscheck(rc):
    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("M")
        J, B = ctx.J, ctx.B
        S0 = th.piece(ctx, "S0")
        table = s0_images(ctx, rc.mutation)
        xi = _probe(J)
        bad = []
        for name in YM_FIELDS + YM_ANTIFIELDS:
            for idx in components(name):
                X = LocalFunctional(xi.pair(J.letter(name, idx)), ctx, "M", pointwise=True)
                via_bracket = antibracket(S0, X).density
                row = table(name, idx)
                via_table = B.zero_s() if row is None else xi.pair(row)
                if not (via_bracket - via_table).is_zero():
                    bad.append(f"{name}{idx}")
        if bad:
            return Outcome(False, "table differs from (S0, -) on " + ", ".join(bad))
        if alg == "su2":
            bad = _expr_route_mismatch(ctx, table)
            if bad:
                return Outcome(False, "expression-layer s0 differs from the table on " + ", ".join(bad[:8]))
        return Outcome(True)

    return _per_backend(rc, one)


def _s0_twice(ctx, x, mutation):
    B = ctx.B
    img = jet_image(ctx, s0_images(ctx, mutation), ("s0", mutation))
    return B.derive(B.derive(x, img, 1), img, 1)


def _div_fbar(J, B, mu, first: bool):
    """sum_nu D^nu Fbar_{nu mu} (first=True) or D^nu Fbar_{mu nu}."""
    acc = B.zero_l()
    for nu in range(DIM):
        f = J.fbar(nu, mu) if first else J.fbar(mu, nu)
        acc = acc + J.D(nu, f).scale(ETA[nu])
    return acc


@suite("s0_square_offshell", "s0 squared on the gauge antifield is the bracket of the background "
       "field-equation with the ghost; it vanishes once the background is on shell.", GAUGE)
def s0_square_offshell(rc):
    printed_sign = {}

    def one(alg):
        th = _theory(alg, rc)
        off = th.context("M")
        J, B = off.J, off.B
        C = J.letter("C")
        for mu in range(DIM):
            val = _s0_twice(off, J.letter("As", (mu,)), rc.mutation).scale(ETA[mu])
            derived = _div_fbar(J, B, mu, True).bracket(C)
            printed = _div_fbar(J, B, mu, False).bracket(C)
            printed_sign[alg] = (val - printed).is_zero()
            if not (val - derived).is_zero():
                return Outcome(False, f"component {mu}: {B.fmt(val - derived)[:300]}")
        on = th.context("U")
        for mu in range(DIM):
            val = _s0_twice(on, on.J.letter("As", (mu,)), rc.mutation)
            if not val.is_zero():
                return Outcome(False, f"on shell, component {mu}: {on.B.fmt(val)[:300]}")
        return Outcome(True)

    out = _per_backend(rc, one)
    # expression layer: normalized form off shell, and zero after the on-shell rule
    e = normalize(expr_s0(expr_s0(parse("(As I ^m)"))), "abstract")
    after = apply_rules(e, ["commute", "onshell"], "U")
    ctx = get_context("ym", "su2", "M", ())
    want = {}
    for mu in range(DIM):
        v = _s0_twice(ctx, ctx.J.letter("As", (mu,)), rc.mutation)
        for comp in range(3):
            if not v.c[comp].is_zero():
                want[(comp, mu)] = v.c[comp]
    got = evaluate(e, ctx.J)
    frees = [ns for ns, _, _ in free_indices(e.terms[0])] if e.terms else []
    got = {(k[frees.index("l")], k[frees.index("s")]): v for k, v in got.items()} if frees else {}
    routes_agree = set(got) == set(want) and all((got[k] - want[k]).is_zero() for k in want)
    # commuting the derivatives leaves a single bracket term
    commuted = apply_rules(e, ["commute"], "M")
    derived_e = normalize(parse("(* (f I J K) (D _n (Fbar J ^n ^m)) (C K))"))
    printed_e = normalize(parse("(* (f I J K) (D _n (Fbar J ^m ^n)) (C K))"))
    out.details["offshell_expr"] = to_text(commuted)
    out.details["onshell_expr"] = to_text(after)
    out.details["printed_sign_matches"] = (all(printed_sign.values()) if printed_sign else False) \
        and commuted == printed_e
    if out.ok and not routes_agree:
        return Outcome(False, "expression layer disagrees with the jet engine: " + to_text(e), out.details)
    if out.ok and commuted != derived_e:
        return Outcome(False, "commuted form is not the bracket term: " + to_text(commuted), out.details)
    if out.ok and after.terms:
        return Outcome(False, "on-shell rule leaves " + to_text(after), out.details)
    if out.ok:
        out.residual = f"off shell: {to_text(commuted)} ; on shell: 0"
    return out


# ------------------------------------------------------------------ operator identities


def _parity(name):
    return FIELDS[name][2]


@suite("current_divergence", "The covariant divergence of the background current (variation of "
       "the free action by the background) equals minus the antifield terms built from s0 of the "
       "antifields and the linear part of s0; off shell.", GAUGE)
def current_divergence(rc):
    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("M")
        J, B = ctx.J, ctx.B
        jd = bg_vary(th.piece(ctx, "S0"), A1).density
        div = B.zero_l()
        for mu in range(DIM):
            div = div + J.D(mu, J.euler(jd, "a", (mu,), "L"))
        table = s0_images(ctx, rc.mutation)
        rhs = B.zero_l()
        for f in YM_FIELDS:
            for idx in components(f):
                t = J.letter(f, idx).bracket(table(PARTNER[f], idx))
                rhs = rhs - t.scale(_sgn(_parity(f)))
        C = J.letter("C")
        for mu in range(DIM):
            rhs = rhs - J.D(mu, C).bracket(J.letter("As", (mu,)))
        rhs = rhs - J.letter("B").bracket(J.letter("Cbs"))
        if div.is_zero():
            return Outcome(False, "current is divergence free: identity would be vacuous")
        r = div - rhs
        if r.is_zero():
            return Outcome(True)
        return Outcome(False, B.fmt(r)[:400])

    return _per_backend(rc, one)


def _K(J, name, idx):
    """Linear part of s0 on fields: A_mu -> D_mu C, Cbar -> B, else 0."""
    if name == "A":
        return J.D(idx[0], J.letter("C"))
    if name == "Cb":
        return J.letter("B")
    return None


@suite("KP_adjoint", "The linearized field operator P and the linear BRST matrix K satisfy "
       "P K + (-1)^e Khat P = 0, Khat the formal adjoint of K; on an on-shell background.", GAUGE)
def kp_adjoint(rc):
    anti = set(YM_ANTIFIELDS)
    inv = {v: k for k, v in PARTNER.items()}

    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("U")
        J, B = ctx.J, ctx.B
        S0 = th.piece(ctx, "S0").density
        S0f = B.filter(S0, lambda ids: not any(L.get(i).name in anti for i in ids))
        Kpair = B.zero_s()
        for f in YM_FIELDS:
            for idx in components(f):
                k = _K(J, f, idx)
                if k is not None:
                    Kpair = Kpair + k.pair(J.letter(PARTNER[f], idx))
        P = {(f, idx): J.euler(S0f, f, idx, "L") for f in YM_FIELDS for idx in components(f)}

        def sub_k(lid):
            let = L.get(lid)
            if let.name in YM_FIELDS:
                k = _K(J, let.name, let.idx)
                return B.zero_l() if k is None else J.Dsym(let.jet, k)
            return None

        def sub_p(lid):
            let = L.get(lid)
            if let.name in anti:
                return J.Dsym(let.jet, P[(inv[let.name], let.idx)])
            return None

        for (f, idx), Pf in P.items():
            PK = B.subst(Pf, sub_k)
            KP = B.subst(J.euler(Kpair, f, idx, "L"), sub_p)
            r = PK + KP.scale(_sgn(_parity(f)))
            if not r.is_zero():
                return Outcome(False, f"row {f}{idx}: {B.fmt(r)[:300]}")
        return Outcome(True)

    return _per_backend(rc, one)


# ------------------------------------------------------------------ cohomology


def _full_curvature(J, m, n):
    A = lambda k: J.letter("A", (k,))
    return J.fbar(m, n) + J.D(m, A(n)) - J.D(n, A(m)) + A(m).bracket(A(n))


def _contract_ff(J, B, F1, F2):
    acc = B.zero_s()
    for m in range(DIM):
        for n in range(DIM):
            if m != n:
                acc = acc + F1(m, n).pair(F2(m, n)).scale(ETA[m] * ETA[n])
    return acc


@suite("cohomology_closedness", "The listed cohomology generators (invariant polynomials of the "
       "ghost, invariant polynomials of the full curvature, background-only factors, and products) "
       "are s-closed, while simple non-invariant monomials are not; two routes for s agree.", GAUGE)
def cohomology_closedness(rc):
    def one(alg):
        th = _theory(alg, rc)
        ctx = th.context("R")
        J, B = ctx.J, ctx.B
        C = J.letter("C")
        F = lambda m, n: _full_curvature(J, m, n)
        Fb = J.fbar
        p3 = C.pair(C.bracket(C))
        theta = _contract_ff(J, B, F, F)
        rbar = _contract_ff(J, B, Fb, Fb)
        cands = {
            "C.[C,C]": (p3, True),
            "F.F": (theta, True),
            "C.[C,C] F.F": (p3 * theta, True),
            "Fbar.Fbar F.F": (rbar * theta, True),
            "A.A": (sum((J.letter("A", (m,)).pair(J.letter("A", (m,))).scale(ETA[m]) for m in range(DIM)),
                        B.zero_s()), False),
            "Fbar.F": (_contract_ff(J, B, Fb, F), False),
        }
        for name, (dens, expect) in cands.items():
            G = LocalFunctional(dens, ctx, "R", pointwise=True)
            via_bracket = s_apply(G, th)
            via_local = s_local(G)
            if not (via_bracket.density - via_local.density).is_zero():
                return Outcome(False, f"{name}: (S, -) and the local derivation differ")
            closed = via_bracket.is_zero()
            if closed != expect:
                return Outcome(False, f"{name}: closed={closed}, expected {expect}")
        return Outcome(True)

    return _per_backend(rc, one)
