from __future__ import annotations

import numpy as np
import pytest

from bvcheck.errors import CFLViolation, StepTooLarge, SupportMismatch
from bvcheck.lattice import (Grid1p1, Params, background_residual, causal_cone_mask, chain_rule_variation,
                             default_retvar_setup, dump_matrix, free_background, free_solution,
                             green_advanced, green_retarded, measured_order, retarded_support_violation,
                             retarded_variation, retarded_wave_op, solve_background)

SMALL = Grid1p1(64, 128, 0.2, 0.1)
PARAMS = Params()


def test_cfl_bound():
    with pytest.raises(CFLViolation):
        Grid1p1(16, 16, 0.1, 0.095)
    Grid1p1(16, 16, 0.1, 0.09)


def test_zero_data_stays_zero():
    g = Grid1p1(16, 32, 0.1, 0.05)
    bg = solve_background(g, Params(lambda0=0.0), np.zeros(16))
    assert not bg.phi.any()


def test_homogeneous_mode_is_a_harmonic_oscillator():
    # phi(t) = cos(m t) for spatially constant data; error falls by 4 per halving
    errs = []
    for k in (1, 2):
        g = Grid1p1(8, 64 * k, 0.1, 0.05 / k)
        bg = solve_background(g, Params(m=0.5, lambda0=0.0), np.ones(8))
        errs.append(np.abs(bg.phi[:, 0] - np.cos(0.5 * g.t)).max())
    assert abs(measured_order(*errs) - 2.0) < 0.05


def test_interacting_background_converges_at_second_order():
    rs = []
    for g in (SMALL, SMALL.refine(2), SMALL.refine(4)):
        st = default_retvar_setup(g, PARAMS)
        rs.append(np.abs(background_residual(solve_background(g, PARAMS, st.phi0, st.pi0))).max())
    assert measured_order(rs[1], rs[2]) > 1.8


def _bg(g=SMALL):
    st = default_retvar_setup(g, PARAMS)
    return solve_background(g, PARAMS, st.phi0, st.pi0), st


def test_retarded_column_vanishes_outside_the_cone():
    bg, _ = _bg()
    for n0, i0 in ((10, 32), (40, 3), (70, 60)):
        col = green_retarded(bg, n0, i0)
        assert retarded_support_violation(col, bg.grid, n0, i0) == 0.0
        assert np.abs(col[causal_cone_mask(bg.grid, n0, i0)]).max() > 0


def test_free_massless_kernel_is_minus_one_half_inside_the_cone():
    g = Grid1p1(64, 64, 0.1, 0.05)
    bg = free_background(g, Params(m=0.0, lambda0=0.0))
    col = green_retarded(bg, 10, 32)
    # deep inside the cone the stencil oscillates around the continuum value
    inner = col[40, 22:43]
    assert abs(inner.mean() + 0.5) < 0.02


def test_causal_propagator_is_antisymmetric():
    bg, _ = _bg()
    pts = [((20, 30), (60, 34)), ((15, 10), (90, 5)), ((33, 40), (50, 44))]
    for (n0, i0), (n1, i1) in pts:
        ret = green_retarded(bg, n0, i0)
        adv = green_advanced(bg, n1, i1)
        # Delta_r(p; q) = Delta_a(q; p), hence Delta(p; q) = -Delta(q; p)
        scale = np.abs(ret).max()
        assert abs(ret[n1, i1] - adv[n0, i0]) < 1e-10 * scale


def _family(g=SMALL):
    st = default_retvar_setup(g, PARAMS)
    bgs = [solve_background(g, PARAMS, st.phi0 + s * st.psi0, st.pi0) for s in (0.0, 0.3, 0.6)]
    return bgs, free_solution(bgs[0], st.u0)


def test_wave_operator_identity_and_composition():
    bgs, u = _family()
    assert np.array_equal(retarded_wave_op(bgs[0], bgs[0], u), u)
    r10 = retarded_wave_op(bgs[0], bgs[1], u)
    r20 = retarded_wave_op(bgs[0], bgs[2], u)
    r21_r10 = retarded_wave_op(bgs[1], bgs[2], r10)
    assert np.abs(r21_r10 - r20).max() < 1e-10 * np.abs(u).max()


def test_wave_operator_is_exact_outside_the_future_of_the_perturbation():
    bgs, u = _family()
    g = SMALL
    dV = bgs[1].potential() - bgs[0].potential()
    # domain of influence of supp dV for the explicit stencil
    reach = np.zeros_like(dV, dtype=bool)
    for n in range(g.nt):
        seed = reach[n] | (dV[n] != 0)
        grown = seed | np.roll(seed, 1) | np.roll(seed, -1)
        reach[n + 1] = grown | reach[n + 1]
    ru = retarded_wave_op(bgs[0], bgs[1], u)
    outside = ~reach
    assert outside.any()
    assert np.abs(ru - u)[outside].max() == 0.0
    assert np.abs(ru - u)[reach].max() > 0


def test_backgrounds_must_agree_in_the_past():
    g = SMALL
    st = default_retvar_setup(g, PARAMS)
    a = solve_background(g, PARAMS, st.phi0, st.pi0)
    b = solve_background(g, PARAMS, st.phi0 + st.psi0, st.pi0)
    u = free_solution(a, st.u0)
    # coupling switched on already at t = 0: the potentials differ in the past
    b.lam = np.ones_like(b.lam)
    with pytest.raises(SupportMismatch):
        retarded_wave_op(a, b, u)


def test_field_independent_functional_has_no_variation():
    st = default_retvar_setup(SMALL, PARAMS)
    st.coeffs, st.points = (2.5,), ((),)
    assert retarded_variation(st, 0.05) == 0.0
    assert chain_rule_variation(st) == 0.0


def test_retarded_variation_matches_chain_rule():
    st = default_retvar_setup(SMALL, PARAMS)
    c = chain_rule_variation(st)
    e1 = abs(retarded_variation(st, 0.1) - c)
    e2 = abs(retarded_variation(st, 0.05) - c)
    assert e2 < 1e-3 * abs(c)
    assert abs(measured_order(e1, e2) - 2.0) < 0.2


def test_step_bounds():
    st = default_retvar_setup(SMALL, PARAMS)
    with pytest.raises(StepTooLarge):
        retarded_variation(st, 0.6)
    with pytest.raises(StepTooLarge):
        retarded_variation(st, 0.0)


def test_measured_order():
    assert measured_order(4.0, 1.0) == pytest.approx(2.0)
    assert measured_order(9.0, 1.0, 3) == pytest.approx(2.0)
    assert measured_order(1.0, 0.0) == float("inf")


def test_dump_round_trip(tmp_path):
    a = np.arange(12.0).reshape(3, 4) / 7
    dump_matrix(tmp_path / "m.txt", a)
    assert np.allclose(np.loadtxt(tmp_path / "m.txt"), a, rtol=1e-12, atol=0)
