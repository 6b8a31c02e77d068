from __future__ import annotations

import random

import pytest
import sympy as sp_
from hypothesis import given, settings
from hypothesis import strategies as st

from bvcheck.errors import GradingMismatch, SpaceMismatch
from bvcheck.expr.num import Q
from bvcheck.starform import (FiniteFieldSpace, HPoly, KernelMatrix, bisolution_kernel, chain_kernel, chain_s0,
                              check_associativity, check_derivation_compat, check_ideal, dump_kernel,
                              intertwines, leibniz_defects, parse_kernel, random_kernel, random_poly, star)

HBAR = sp_.Symbol("hbar")


def to_sympy(F: HPoly, xs):
    out = 0
    for k, p in F.c.items():
        for mono, c in p.t.items():
            term = sp_.Rational(int(c.numerator), int(c.denominator)) * HBAR**k
            for v in mono:
                term *= xs[F.space.index_of_var(v)]
            out += term
    return sp_.expand(out)


def oracle_star(F: HPoly, G: HPoly, w: KernelMatrix):
    """exp(hbar sum w_ij d/dx_i d/dy_j) f(x) g(y) at y = x, by sympy (even variables only)."""
    n = F.space.dim
    xs = sp_.symbols(f"x0:{n}")
    ys = sp_.symbols(f"y0:{n}")
    e = sp_.expand(to_sympy(F, xs) * to_sympy(G, xs).subs(dict(zip(xs, ys)), simultaneous=True))
    total, k, fact = 0, 0, 1
    while e != 0:
        total += HBAR**k * e / fact
        e = sp_.expand(sum(sp_.Rational(int(c.numerator), int(c.denominator)) * sp_.diff(e, xs[i], ys[j])
                           for i, j, c in w.entries()))
        k += 1
        fact *= k
    return sp_.expand(total.subs(dict(zip(ys, xs)), simultaneous=True)), xs


def test_square_times_square_closed_form():
    sp = FiniteFieldSpace(3)
    rng = random.Random(1)
    w = random_kernel(rng, sp)
    i, j = 0, 2
    xi, xj = sp.x(i), sp.x(j)
    got = star(xi * xi, xj * xj, w)
    c = w.w[i][j]
    want = xi * xi * xj * xj + HPoly({1: (xi * xj).scale(4 * c).at_hbar0(), 2: HPoly.const(2 * c * c, sp).at_hbar0()}, sp)
    assert got == want


def test_commutator_of_linear_fields():
    sp = FiniteFieldSpace(4)
    w = random_kernel(random.Random(2), sp)
    for i in range(4):
        for j in range(4):
            comm = star(sp.x(i), sp.x(j), w) - star(sp.x(j), sp.x(i), w)
            c = w.w[i][j] - w.w[j][i]
            assert comm == HPoly({1: HPoly.const(c, sp).at_hbar0()}, sp)


def test_unit_and_constants():
    sp = FiniteFieldSpace(2, "gauge")
    rng = random.Random(4)
    w = random_kernel(rng, sp)
    one = HPoly.const(1, sp)
    F = random_poly(rng, sp, 3, hbar=True)
    assert star(one, F, w) == F and star(F, one, w) == F
    a, b = HPoly.const(3, sp), HPoly.const(Q(-1, 2), sp)
    assert star(a, b, w) == HPoly.const(Q(-3, 2), sp)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_star_matches_sympy_oracle(seed, n):
    rng = random.Random(seed)
    sp = FiniteFieldSpace(n)
    w = random_kernel(rng, sp)
    F = random_poly(rng, sp, 3)
    G = random_poly(rng, sp, 3)
    want, xs = oracle_star(F, G, w)
    assert to_sympy(star(F, G, w), xs) == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([("scalar", 5), ("gauge", 2)]))
def test_associativity_property(seed, shape):
    mode, n = shape
    rng = random.Random(seed)
    sp = FiniteFieldSpace(n, mode)
    w = random_kernel(rng, sp)
    F, G, H = (random_poly(rng, sp, 3, hbar=True) for _ in range(3))
    assert star(star(F, G, w), H, w) == star(F, star(G, H, w), w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_graded_commutator_is_central(seed):
    rng = random.Random(seed)
    sp = FiniteFieldSpace(2, "gauge")
    w = random_kernel(rng, sp)
    i, j = rng.randrange(sp.dim), rng.randrange(sp.dim)
    sg = -1 if sp.parity(i) and sp.parity(j) else 1
    c = star(sp.x(i), sp.x(j), w) - star(sp.x(j), sp.x(i), w).scale(sg)
    assert c.degrees() <= {2}
    F = random_poly(rng, sp, 3, hbar=True)
    assert star(c, F, w) == star(F, c, w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_Deg_is_additive(seed):
    rng = random.Random(seed)
    sp = FiniteFieldSpace(3)
    w = random_kernel(rng, sp)
    d1, d2 = rng.randrange(4), rng.randrange(4)
    F = HPoly.const(1, sp)
    G = HPoly.const(1, sp)
    for _ in range(d1):
        F = F * sp.x(rng.randrange(3))
    for _ in range(d2):
        G = G * sp.x(rng.randrange(3))
    assert star(F, G, w).degrees() == {d1 + d2}


def test_missing_factorials_break_associativity():
    sp = FiniteFieldSpace(3)
    w = random_kernel(random.Random(0), sp)
    assert check_associativity(w, trials=20, seed=0)["ok"]
    assert not check_associativity(w, trials=20, seed=0, factorials=False)["ok"]


def test_space_and_parity_checks():
    a, b = FiniteFieldSpace(2), FiniteFieldSpace(3)
    with pytest.raises(SpaceMismatch):
        a.x(0) + b.x(0)
    g = FiniteFieldSpace(1, "gauge")
    rows = [[0] * 4 for _ in range(4)]
    rows[g.index("A", 0)][g.index("C", 0)] = 1
    with pytest.raises(GradingMismatch):
        KernelMatrix(rows, g)


def test_kernel_text_round_trip():
    sp = FiniteFieldSpace(3)
    w = random_kernel(random.Random(9), sp)
    assert parse_kernel(dump_kernel(w), sp).w == w.w
    assert parse_kernel("1 2 # row\n-3/4 0\n", FiniteFieldSpace(2)).w[1][0] == Q(-3, 4)


# ---------------------------------------------------------------- derivations


def _chain(sp, rng):
    n = sp.sites
    wv = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    ws = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    return chain_kernel(sp, wv, ws)


def test_chain_kernel_is_compatible():
    sp = FiniteFieldSpace(3, "gauge")
    K = chain_s0(sp)
    w = _chain(sp, random.Random(1))
    assert intertwines(K, w)
    assert leibniz_defects(K, w, trials=6) == []


def test_zero_map_is_compatible_with_any_kernel():
    sp = FiniteFieldSpace(2, "gauge")
    K = [[Q(0)] * sp.dim for _ in range(sp.dim)]
    rep = check_derivation_compat(K, random_kernel(random.Random(3), sp))
    assert rep["intertwining"] and rep["derivation"] and rep["agree"]


@pytest.mark.parametrize("block", [("C", "Cb"), ("A", "B")])
def test_perturbed_kernel_shows_a_defect(block):
    sp = FiniteFieldSpace(3, "gauge")
    K = chain_s0(sp)
    w = _chain(sp, random.Random(2))
    rows = [list(r) for r in w.w]
    rows[sp.index(block[0], 1)][sp.index(block[1], 2)] += 1
    bad = KernelMatrix(rows, sp)
    rep = check_derivation_compat(K, bad)
    assert not rep["intertwining"] and not rep["derivation"] and rep["agree"]
    assert rep["defect"] != "0"


def test_free_block_perturbation_stays_compatible():
    # w_AA is unconstrained by the intertwining relation
    sp = FiniteFieldSpace(3, "gauge")
    K = chain_s0(sp)
    rows = [list(r) for r in _chain(sp, random.Random(2)).w]
    rows[sp.index("A", 1)][sp.index("A", 2)] += 1
    rep = check_derivation_compat(K, KernelMatrix(rows, sp))
    assert rep["intertwining"] and rep["derivation"]


def test_derivation_must_raise_ghost_number():
    sp = FiniteFieldSpace(1, "gauge")
    K = [[Q(0)] * sp.dim for _ in range(sp.dim)]
    K[sp.index("A", 0)][sp.index("B", 0)] = Q(1)
    with pytest.raises(GradingMismatch):
        intertwines(K, random_kernel(random.Random(0), sp))


# ---------------------------------------------------------------- on-shell ideal


def test_bisolution_kernel_preserves_ideal():
    sp = FiniteFieldSpace(4)
    P = [[1, 1, 0, 0], [0, 1, -1, 0]]
    rng = random.Random(6)
    assert check_ideal(sp, P, bisolution_kernel(rng, sp, P), trials=6)["ideal"]
    assert not check_ideal(sp, P, random_kernel(rng, sp), trials=6)["ideal"]
