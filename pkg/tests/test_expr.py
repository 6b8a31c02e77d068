from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvcheck.errors import (MalformedIndex, MixedGrade, OrderExceeded, ParseError, RuleNotValidOnRegion,
                            UnknownGenerator)
from bvcheck.expr import (apply_rules, equal_by_euler, equal_density, evaluate, grade_of, normalize,
                          oracle_equal, parse, s0, to_text)


def canon(text, algebra="abstract"):
    return normalize(parse(text), algebra)


# ---------------------------------------------------------------- canonical form


@pytest.mark.parametrize("alg", ["abstract", "su2"])
def test_ghost_anticommutation_cancels(alg):
    assert canon("(+ (* (C I) (C J)) (* (C J) (C I)))", alg).is_zero()


@pytest.mark.parametrize("alg", ["abstract", "su2"])
def test_odd_square_vanishes(alg):
    assert canon("(* (C I) (C I))", alg).is_zero()


def test_metric_contraction():
    assert canon("(* (g ^mu ^nu) (g _nu _rho) (A I ^rho))") == canon("(A I ^mu)")


def test_dummy_renaming_is_irrelevant():
    a = canon("(* (A I _mu) (A I ^mu))")
    b = canon("(* (A K ^nu) (A K _nu))")
    assert a == b


def test_cubic_ghost_term_against_bracket_form():
    # f^{IJK} C^I C^J C^K = C^I [C,C]^I with [X,Y]^I = f^{IJK} X^J Y^K
    lhs = canon("(* (f I J K) (C I) (C J) (C K))")
    rhs = canon("(* (C I) (f I J K) (C J) (C K))")
    assert lhs == rhs
    # su(2) oracle: a single monomial +-6 C^1 C^2 C^3
    vals = evaluate(lhs)
    assert list(vals) == [()]
    (poly,) = vals.values()
    assert len(poly.t) == 1 and abs(next(iter(poly.t.values()))) == 6


def test_curvature_commutator():
    # (D_mu D_nu - D_nu D_mu) C = [Fbar_{mu nu}, C]
    e = apply_rules(parse("(- (D _mu (D _nu (C I))) (D _nu (D _mu (C I))))"), ["commute"], "M")
    want = parse("(* (f I J K) (Fbar J _mu _nu) (C K))")
    assert oracle_equal(e, want)
    assert e == normalize(want)


def test_free_indices_must_agree():
    with pytest.raises(MalformedIndex):
        canon("(+ (A I _mu) (C I))")
    with pytest.raises(MalformedIndex):
        canon("(* (A I _mu) (A I _mu) (A I _mu))")


def test_parse_errors():
    for bad in ["(+ (C I)", ")", "", "(* (Q I))", "(D mu (C I))"]:
        with pytest.raises((ParseError, UnknownGenerator)):
            parse(bad)


def test_aliases_parse_to_canonical_names():
    assert parse("(C‡ I)") == parse("(Cs I)")
    assert to_text(parse("(A‡ I ^mu)")) == "(As I ^mu)"


# ---------------------------------------------------------------- grading


def test_grading_of_gauge_field():
    g = grade_of(parse("(A I _mu)"))
    assert (g.ghost, g.mass_dim, g.parity, g.deg_field) == (0, 1, 0, 1)


def test_grading_of_ghost_antifield():
    g = grade_of(parse("(Cs I)"))
    assert (g.ghost, g.mass_dim, g.parity) == (-2, 4, 0)


def test_grading_of_unit():
    g = grade_of(parse("1"))
    assert (g.ghost, g.mass_dim, g.parity, g.deg_field, g.deg_hbar, g.Deg) == (0, 0, 0, 0, 0, 0)


def test_hbar_counts_twice_in_Deg():
    g = grade_of(parse("(* hbar phi phi)"))
    assert g.Deg == 4 and g.deg_hbar == 1


def test_mixed_grading_raises():
    with pytest.raises(MixedGrade):
        grade_of(parse("(+ (* (C I) (Cbar I)) (* (B I) (B I) (B J) (B J)))"))
    with pytest.raises(MixedGrade):
        grade_of(parse("0"))


# ---------------------------------------------------------------- rules and s0


def test_cutoff_rule_on_R():
    assert apply_rules(parse("(* lam (A I _mu))"), ["cutoff"], "R") == canon("(A I _mu)")


def test_cutoff_rule_invalid_on_M():
    with pytest.raises(RuleNotValidOnRegion):
        apply_rules(parse("(* lam (A I _mu))"), ["cutoff"], "M")


def test_onshell_rule_on_U():
    assert apply_rules(parse("(D ^mu (Fbar I _mu _nu))"), ["onshell"], "U").is_zero()
    with pytest.raises(RuleNotValidOnRegion):
        apply_rules(parse("(D ^mu (Fbar I _mu _nu))"), ["onshell"], "V")


def test_s0_table_values():
    assert normalize(s0(parse("(A I _mu)"))) == canon("(D _mu (C I))")
    assert normalize(s0(parse("(B I)"))).is_zero()
    assert normalize(s0(parse("(Cbar I)"))) == canon("(B I)")


def test_s0_square_on_antifield():
    e = normalize(s0(s0(parse("(As I ^m)"))))
    commuted = apply_rules(e, ["commute"], "M")
    assert commuted == canon("(* (f I J K) (D _n (Fbar J ^n ^m)) (C K))")
    assert apply_rules(e, ["commute", "onshell"], "U").is_zero()


# ---------------------------------------------------------------- integrated equality


def test_integration_by_parts():
    a = parse("(vol (* (D _mu phi) (D ^mu phi)))")
    b = parse("(vol (* -1 phi (D _mu (D ^mu phi))))")
    assert equal_density(a, b, 2)
    assert equal_by_euler(a, b)


def test_exact_divergence_is_zero():
    a = parse("(vol (D _mu (* phi phi (D ^mu phi))))")
    assert equal_density(a, parse("0"), 3)
    assert equal_by_euler(a, parse("0"))


def test_quartic_not_equal_to_derivative_coupling():
    a = parse("(vol (* phi phi phi phi))")
    b = parse("(vol (* phi phi (D _mu phi) (D ^mu phi)))")
    assert not equal_density(a, b, 2)
    assert not equal_by_euler(a, b)


def test_order_bound_is_enforced():
    with pytest.raises(OrderExceeded):
        equal_density(parse("(vol (D _mu (D ^mu phi)))"), parse("0"), 1)


def test_gauge_density_routes_agree():
    # <D_mu C, D^mu Cbar> = -<C, box Cbar> up to a divergence
    a = parse("(vol (* (D _mu (C I)) (D ^mu (Cbar I))))")
    b = parse("(vol (* -1 (C I) (D _mu (D ^mu (Cbar I)))))")
    assert equal_density(a, b, 2) and equal_by_euler(a, b)
    c = parse("(vol (* (C I) (D _mu (D ^mu (Cbar I)))))")
    assert not equal_density(a, c, 2) and not equal_by_euler(a, c)


# ---------------------------------------------------------------- properties

# contracted building blocks: every label appears exactly twice within a block
BLOCKS = [
    ("(C I)", "(Cbar I)"),
    ("(A J _mu)", "(A J ^mu)"),
    ("(B K)", "(C K)"),
    ("(D _nu phi)", "(D ^nu phi)"),
    ("phi",),
    ("(Cs L)", "(C L)"),
    ("(D _rho (A M ^rho))", "(B M)"),
]


NEUTRAL = (0, 1, 3, 4, 6)  # ghost number 0, even


@st.composite
def contracted_sums(draw):
    # one core shared by every term keeps the sum homogeneous; extras are neutral
    core = draw(st.lists(st.sampled_from(range(len(BLOCKS))), min_size=1, max_size=2, unique=True))
    n_terms = draw(st.integers(1, 3))
    terms = []
    for _ in range(n_terms):
        spare = [b for b in NEUTRAL if b not in core]
        extra = draw(st.lists(st.sampled_from(spare), max_size=1, unique=True))
        factors = [f for b in core + extra for f in BLOCKS[b]]
        order = draw(st.permutations(factors))
        coef = draw(st.integers(-3, 3).filter(bool))
        terms.append(f"(* {coef} {' '.join(order)})")
    return "(+ " + " ".join(terms) + ")"


@settings(max_examples=40, deadline=None)
@given(contracted_sums())
def test_normalize_idempotent_and_round_trip(text):
    e = normalize(parse(text))
    assert normalize(e) == e
    assert parse(to_text(e)) == e


@settings(max_examples=25, deadline=None)
@given(contracted_sums(), st.sampled_from(["abstract", "su2"]))
def test_normalize_preserves_value(text, alg):
    # independent oracle: su(2) component enumeration of both sides
    e = parse(text)
    assert oracle_equal(normalize(e, alg), e)


@settings(max_examples=30, deadline=None)
@given(contracted_sums(), contracted_sums())
def test_grading_is_additive(t1, t2):
    x, y = normalize(parse(t1)), normalize(parse(t2))
    try:
        gx, gy = grade_of(x), grade_of(y)
    except MixedGrade:
        return
    prod = normalize(x * y)
    if prod.is_zero():
        return
    assert grade_of(prod) == gx + gy


def test_random_reordering_sign_matches_oracle():
    rng = random.Random(7)
    for _ in range(20):
        factors = ["(C I)", "(Cbar I)", "(As J ^mu)", "(A J _mu)", "(Cs K)", "(B K)"]
        rng.shuffle(factors)
        a = parse("(* " + " ".join(factors) + ")")
        rng.shuffle(factors)
        b = parse("(* " + " ".join(factors) + ")")
        same = oracle_equal(a, b)
        opposite = oracle_equal(a, -b)
        assert same != opposite
        assert (normalize(a) == normalize(b)) == same
