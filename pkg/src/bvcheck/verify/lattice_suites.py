"""Lattice suites: convergence studies on a grid and its refinement.

Orders are measured over one refinement by the factor ``lattice.refine``
(2 by default).  Passing needs an order of at least 2 - tolerance; the
Green-function check also needs it to be at most 2 + tolerance.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..lattice import (
    Grid1p1,
    Params,
    chain_rule_variation,
    classical_background_defect,
    continuum_residual,
    default_retvar_setup,
    dump_matrix,
    free_green_error,
    free_solution,
    green_advanced,
    green_retarded,
    measured_order,
    retarded_support_violation,
    retarded_variation,
    retarded_wave_op,
    solve_background,
)
from .registry import Outcome, suite


def lattice_setup(rc):
    lat = rc.cfg["lattice"]
    grid = Grid1p1(lat["nx"], lat["nt"], lat["dx"], lat["dt"])
    params = Params(m=lat["m"], lambda0=lat["lambda0"])
    return grid, params, lat["refine"], lat["tolerance"]


def _dump(rc, name, arr):
    d = rc.cfg.get("dump")
    if d:
        Path(d).mkdir(parents=True, exist_ok=True)
        dump_matrix(Path(d) / f"{name}.txt", arr)


def _r(x):
    """Rounded float for reports (keeps them byte-stable)."""
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.6e}")


def _sample(arr, k):
    return arr[::k, ::k]


@suite("lattice_green", "Lattice retarded Green functions vanish outside the discrete light cone, "
       "retarded and advanced kernels are transposes, and the free kernel converges to the closed "
       "1+1D form at second order.", symbolic=False)
def lattice_green(rc):
    grid, params, k, tol = lattice_setup(rc)
    mut = rc.mutation
    st = default_retvar_setup(grid, params)
    bg = solve_background(grid, params, st.phi0, st.pi0, mutation=mut)
    n0, i0 = grid.nt // 6, grid.nx // 2
    col = green_retarded(bg, n0, i0, mut)
    _dump(rc, "green_retarded", col)
    support = retarded_support_violation(col, grid, n0, i0)
    # Delta_r(p; q) = Delta_a(q; p)
    n1, i1 = (2 * grid.nt) // 3, i0 + grid.nx // 16
    adv = green_advanced(bg, n1, i1, mut)
    scale = max(np.abs(col).max(), 1e-300)
    antisym = abs(col[n1, i1 % grid.nx] - adv[n0, i0]) / scale
    e1 = free_green_error(grid, mut)
    e2 = free_green_error(grid.refine(k), mut)
    order = measured_order(e1, e2, k)
    details = {"support_violation": _r(support), "transpose_defect": _r(antisym),
               "error_coarse": _r(e1), "error_fine": _r(e2), "order": _r(order)}
    ok = support == 0.0 and antisym < 1e-10 and abs(order - 2.0) <= tol
    return Outcome(ok, _r(e2) if ok else _r(max(e2, support, antisym)), details)


def _rop_fields(grid, params, mut):
    st = default_retvar_setup(grid, params)
    bgs = [solve_background(grid, params, st.phi0 + s * st.psi0, st.pi0, mutation=mut) for s in (0.0, 0.3, 0.6)]
    u = free_solution(bgs[0], st.u0)
    r10 = retarded_wave_op(bgs[0], bgs[1], u, mut)
    r21_r10 = retarded_wave_op(bgs[1], bgs[2], r10, mut)
    r20 = retarded_wave_op(bgs[0], bgs[2], u, mut)
    res = np.abs(continuum_residual(grid, bgs[1].potential(), r10)).max()
    exact = np.abs(r21_r10 - r20).max()
    same = np.abs(retarded_wave_op(bgs[0], bgs[0], u, mut) - u).max()
    return {"res": res, "r21r10": r21_r10, "r20": r20, "exact": exact, "same": same, "r10": r10}


@suite("lattice_rop", "The retarded wave operator maps solutions on one background to solutions "
       "on another (continuum residual converging at second order) and composes: r21 r10 = r20, "
       "exactly on the lattice and convergently across refinements.", symbolic=False)
def lattice_rop(rc):
    grid, params, k, tol = lattice_setup(rc)
    mut = rc.mutation
    levels = [grid, grid.refine(k), grid.refine(k * k)]
    out = [_rop_fields(g, params, mut) for g in levels]
    _dump(rc, "rop_r10", out[0]["r10"])
    res_order = measured_order(out[0]["res"], out[1]["res"], k)
    # composition, measured as self-convergence of r21 r10 against the finer r20
    c1 = np.abs(out[0]["r21r10"] - _sample(out[1]["r20"], k)).max()
    c2 = np.abs(out[1]["r21r10"] - _sample(out[2]["r20"], k)).max()
    comp_order = measured_order(c1, c2, k)
    exact = max(o["exact"] for o in out)
    same = max(o["same"] for o in out)
    details = {"solution_residual": [_r(out[0]["res"]), _r(out[1]["res"])],
               "solution_order": _r(res_order), "composition_defect": [_r(c1), _r(c2)],
               "composition_order": _r(comp_order), "discrete_composition": _r(exact),
               "identity_defect": _r(same)}
    ok = (res_order >= 2.0 - tol and comp_order >= 2.0 - tol and exact < 1e-10 and same == 0.0)
    return Outcome(ok, _r(out[1]["res"]) if ok else _r(max(out[1]["res"], c2, exact)), details)


@suite("lattice_retvar", "The retarded variation (central difference of the Moller pullback) "
       "converges to its chain-rule value at second order in the step, and the classical "
       "background-independence defect vanishes at second order.", symbolic=False)
def lattice_retvar(rc):
    grid, params, k, tol = lattice_setup(rc)
    st = default_retvar_setup(grid, params)
    h1, h2 = 0.1, 0.1 / k
    c = chain_rule_variation(st)
    v1, v2 = retarded_variation(st, h1) - c, retarded_variation(st, h2) - c
    var_order = measured_order(v1, v2, k)
    d1 = classical_background_defect(st, h1)[0]
    d2 = classical_background_defect(st, h2)[0]
    def_order = measured_order(d1, d2, k)
    # grid self-convergence of the chain-rule value, reported only
    fine = default_retvar_setup(grid.refine(k), params)
    grid_shift = abs(chain_rule_variation(fine) - c)
    details = {"variation_defect": [_r(v1), _r(v2)], "variation_order": _r(var_order),
               "background_defect": [_r(d1), _r(d2)], "background_order": _r(def_order),
               "chain_rule_value": _r(c), "grid_shift": _r(grid_shift)}
    ok = var_order >= 2.0 - tol and def_order >= 2.0 - tol
    return Outcome(ok, _r(abs(d2)) if ok else _r(max(abs(v2), abs(d2))), details)

