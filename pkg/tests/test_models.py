from __future__ import annotations

import pytest

from bvcheck.errors import InvalidAlgebra
from bvcheck.expr import letters as L
from bvcheck.expr.letters import DIM, ETA
from bvcheck.expr.num import Q
from bvcheck.funcalc import (Variation, _term_letters, bg_vary, dyn_vary, field_degree_part, functional,
                             get_context, is_null)
from bvcheck.models import (GRADINGS, LieAlgebraSpec, build_scalar_theory, build_ym_theory,
                            cohomology_generator_closedness)

ALGS = ["su2", "abstract"]


def same(x, y):
    return (x - y).is_zero()


def mass_dims(ctx, x):
    """Set of mass dimensions of the terms of a density (derivatives count 1)."""
    out = set()
    for ids in _term_letters(ctx, x):
        d = 0
        for i in ids:
            let = L.get(i)
            base = 2 if let.name == "F" else GRADINGS.get(let.name, {"mass_dim": 0})["mass_dim"]
            if let.name in ("m", "phib", "a", "a2", "phip"):
                base = 1
            d += base + len(let.jet)
        out.add(d)
    return out


def test_generator_table():
    assert GRADINGS["A"] == {"ghost": 0, "mass_dim": 1, "parity": 0}
    assert GRADINGS["C"]["ghost"] == 1 and GRADINGS["C"]["parity"] == 1
    assert GRADINGS["Cs"] == {"ghost": -2, "mass_dim": 4, "parity": 0}
    # antifields carry the density weight: d + d* = 4 and ghost numbers add to -1
    for f, fs in (("A", "As"), ("B", "Bs"), ("C", "Cs"), ("Cb", "Cbs")):
        assert GRADINGS[f]["mass_dim"] + GRADINGS[fs]["mass_dim"] == 4
        assert GRADINGS[f]["ghost"] + GRADINGS[fs]["ghost"] == -1
        assert GRADINGS[f]["parity"] != GRADINGS[fs]["parity"]


def test_su2_structure_constants():
    f = LieAlgebraSpec("su2").structure_constants()
    assert f[(1, 2, 3)] == 1 and f[(2, 1, 3)] == -1
    assert all(f.get((j, i, k), 0) == -v for (i, j, k), v in f.items())
    with pytest.raises(InvalidAlgebra):
        LieAlgebraSpec("e8")
    with pytest.raises(InvalidAlgebra):
        LieAlgebraSpec("abstract").structure_constants()


@pytest.mark.parametrize("alg", ALGS)
def test_action_is_ghost_neutral_with_mass_dimension_four(alg):
    th = build_ym_theory(alg)
    ctx = th.context("R")
    S = th.piece(ctx, "S")
    assert S.ghost() == 0 and S.parity() == 0
    assert mass_dims(ctx, S.density) == {4}


@pytest.mark.parametrize("alg", ALGS)
def test_free_antifield_part(alg):
    # S_sc at field degree 2 is -<D_mu C, As^mu> - <B, Cbs>
    th = build_ym_theory(alg)
    ctx = th.context("R")
    J, B = ctx.J, ctx.B
    got = field_degree_part(ctx, th.piece(ctx, "S_sc").density, 2)
    want = B.zero_s()
    for mu in range(DIM):
        want = want - J.D(mu, J.letter("C")).pair(J.letter("As", (mu,)))
    want = want - J.letter("B").pair(J.letter("Cbs"))
    assert same(got, want)


@pytest.mark.parametrize("alg", ALGS)
def test_B_dependence_of_gauge_fixing_term(alg):
    # s Psi = <B, div A + B/2> - <Cbar, s(div A)>; only the first piece contains B
    th = build_ym_theory(alg)
    ctx = th.context("R")
    J, B = ctx.J, ctx.B
    sPsi = th.piece(ctx, "s_Psi").density
    Bf = J.letter("B")
    div = B.zero_l()
    for mu in range(DIM):
        div = div + J.D(mu, J.letter("A", (mu,))).scale(ETA[mu])
    has_B = B.filter(sPsi, lambda ids: any(L.get(i).name == "B" for i in ids))
    assert same(has_B, Bf.pair(div) + Bf.pair(Bf).scale(Q(1, 2)))


def test_scalar_split_and_free_limit():
    th = build_scalar_theory()
    ctx = get_context("scalar", "su2", "M")
    v = Variation("phip", "phibar")
    S, Sint = th.piece(ctx, "S"), th.piece(ctx, "S_int")
    assert is_null(bg_vary(S, v) - dyn_vary(Sint, v))
    assert build_scalar_theory(coupling=0).piece(ctx, "S_int").is_zero()


def test_scalar_split_breaks_if_interaction_changes():
    th = build_scalar_theory()
    ctx = get_context("scalar", "su2", "M")
    v = Variation("phip", "phibar")
    S, Sint = th.piece(ctx, "S"), th.piece(ctx, "S_int")
    assert not is_null(bg_vary(S, v) - dyn_vary(Sint.scale(2), v))


def _pw(ctx, d):
    return functional(ctx, d, "R", pointwise=True)


@pytest.mark.parametrize("alg", ALGS)
def test_ghost_cube_is_closed(alg):
    th = build_ym_theory(alg)
    ctx = th.context("R")
    C = ctx.J.letter("C")
    assert cohomology_generator_closedness(th, _pw(ctx, C.pair(C.bracket(C))))


@pytest.mark.parametrize("alg", ALGS)
def test_full_curvature_square_is_closed(alg):
    th = build_ym_theory(alg)
    ctx = th.context("R")
    J = ctx.J
    acc = ctx.B.zero_s()
    for m in range(DIM):
        for n in range(DIM):
            if m == n:
                continue
            A_m, A_n = J.letter("A", (m,)), J.letter("A", (n,))
            F = J.fbar(m, n) + J.D(m, A_n) - J.D(n, A_m) + A_m.bracket(A_n)
            acc = acc + F.pair(F).scale(ETA[m] * ETA[n])
    assert cohomology_generator_closedness(th, _pw(ctx, acc))


@pytest.mark.parametrize("alg", ALGS)
def test_gauge_field_square_is_not_closed(alg):
    th = build_ym_theory(alg)
    ctx = th.context("R")
    A0 = ctx.J.letter("A", (0,))
    assert not cohomology_generator_closedness(th, _pw(ctx, A0.pair(A0)))
