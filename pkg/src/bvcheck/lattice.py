"""1+1 dimensional lattice realization of the scalar model.

Conventions: signature (-,+), box = -d_t^2 + d_x^2, periodic space.  The
background obeys (box - m^2) phibar - lambda phibar^3 / 6 = 0 (the field
equation of the action used by :mod:`bvcheck.models`) and the linearized
operator is P = box - m^2 - lambda phibar^2 / 2 with lambda(t, x) a
compactly supported cutoff profile times lambda0.

Everything is discretized with the centered leapfrog stencil

    (P_h u)^n = -(u^{n+1} - 2u^n + u^{n-1})/dt^2 + (u^n_{+} - 2u^n + u^n_{-})/dx^2 - V^n u^n

which is explicit in time, so retarded solutions have an exact discrete
domain of dependence.  Point sources are Kronecker deltas divided by
dx*dt.  With this sign convention the continuum retarded kernel of
box (m = 0) is -1/2 theta(t - |x|).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation, NonFinite, StepTooLarge, SupportMismatch

CFL_MAX = 0.9


@dataclass(frozen=True)
class Grid1p1:
    nx: int = 128
    nt: int = 256
    dx: float = 0.1
    dt: float = 0.05

    def __post_init__(self):
        if self.nx < 4 or self.nt < 4 or self.dx <= 0 or self.dt <= 0:
            raise ValueError("grid sizes and spacings must be positive")
        if self.dt / self.dx > CFL_MAX + 1e-12:
            raise CFLViolation(f"dt/dx = {self.dt / self.dx:.4g} exceeds {CFL_MAX}")

    @property
    def x(self):
        return np.arange(self.nx) * self.dx

    @property
    def t(self):
        return np.arange(self.nt + 1) * self.dt

    @property
    def length(self):
        return self.nx * self.dx

    def refine(self, k: int = 2) -> "Grid1p1":
        return Grid1p1(self.nx * k, self.nt * k, self.dx / k, self.dt / k)


@dataclass(frozen=True)
class Params:
    m: float = 0.5
    lambda0: float = 1.0
    # cutoff plateau as fractions of the time span and box length:
    # t in [t0, t1], x in [x0, x1], ramps of relative width w
    cutoff: tuple = (0.12, 0.43, 0.16, 0.84, 0.08)


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    a = np.exp(-1.0 / np.where(inside, s, 1.0))
    b = np.exp(-1.0 / np.where(inside, 1 - s, 1.0))
    out[inside] = (a / (a + b))[inside]
    out[s >= 1] = 1.0
    return out


def plateau(z, lo, hi, w):
    return smooth_step((z - lo) / w) * smooth_step((hi - z) / w)


def cutoff_profile(grid: Grid1p1, params: Params, scale: float | None = None):
    """lambda(t, x): lambda0 on a plateau, exactly zero outside a compact set."""
    t0, t1, x0, x1, w = params.cutoff
    T, L = grid.nt * grid.dt, grid.length
    lt = plateau(grid.t / T, t0, t1, w)
    lx = plateau(grid.x / L, x0, x1, w)
    lam = params.lambda0 if scale is None else scale
    return lam * np.outer(lt, lx)


def lap(u, dx, stencil_mutation=False):
    diag = -1.9 if stencil_mutation else -2.0
    return (np.roll(u, 1, axis=-1) + diag * u + np.roll(u, -1, axis=-1)) / dx**2


def _check(u, what):
    if not np.all(np.isfinite(u)):
        raise NonFinite(f"{what} produced non-finite values")


@dataclass
class BackgroundSolution:
    grid: Grid1p1
    params: Params
    phi: np.ndarray
    lam: np.ndarray
    info: dict = field(default_factory=dict)

    def potential(self):
        """V = m^2 + lambda phibar^2 / 2 of the linearized operator."""
        return self.params.m**2 + 0.5 * self.lam * self.phi**2


def solve_background(grid: Grid1p1, params: Params, phi0, pi0=None, lam=None,
                     mutation=None) -> BackgroundSolution:
    """Leapfrog evolution of (box - m^2) phi - lambda phi^3 / 6 = 0.

    phi0, pi0 are the field and time derivative at t = 0; the first step
    uses the second-order Taylor start.
    """
    if grid.dt / grid.dx > CFL_MAX + 1e-12:
        raise CFLViolation("CFL bound violated")
    dt, dx = grid.dt, grid.dx
    if lam is None:
        lam = cutoff_profile(grid, params)
    phi0 = np.asarray(phi0, dtype=float)
    pi0 = np.zeros(grid.nx) if pi0 is None else np.asarray(pi0, dtype=float)
    bad = mutation == "lattice_stencil"
    m2 = params.m**2
    out = np.zeros((grid.nt + 1, grid.nx))
    out[0] = phi0
    acc0 = lap(phi0, dx, bad) - m2 * phi0 - lam[0] * phi0**3 / 6
    out[1] = phi0 + dt * pi0 + 0.5 * dt**2 * acc0
    for n in range(1, grid.nt):
        u = out[n]
        acc = lap(u, dx, bad) - m2 * u - lam[n] * u**3 / 6
        out[n + 1] = 2 * u - out[n - 1] + dt**2 * acc
        if not np.all(np.isfinite(out[n + 1])) or np.abs(out[n + 1]).max() > 1e8:
            raise NonFinite(f"background blew up at step {n + 1}")
    return BackgroundSolution(grid, params, out, lam)


def free_background(grid: Grid1p1, params: Params) -> BackgroundSolution:
    lam = np.zeros((grid.nt + 1, grid.nx))
    return BackgroundSolution(grid, params, lam.copy(), lam)


# ------------------------------------------------------------------ linear solves


def solve_linear(grid: Grid1p1, V, f, u0=None, u1=None, mutation=None):
    """Retarded solution of P_h u = f with V the potential (zero past data by default).

    f is sampled on the grid; the stencil at time n determines u^{n+1}.
    """
    dt, dx = grid.dt, grid.dx
    bad = mutation == "lattice_stencil"
    u = np.zeros((grid.nt + 1, grid.nx))
    if u0 is not None:
        u[0] = u0
    if u1 is not None:
        u[1] = u1
    V = np.broadcast_to(V, u.shape)
    f = np.broadcast_to(f, u.shape)
    for n in range(1, grid.nt):
        un = u[n]
        u[n + 1] = 2 * un - u[n - 1] + dt**2 * (lap(un, dx, bad) - V[n] * un - f[n])
    _check(u, "linear solve")
    return u


def apply_P(grid: Grid1p1, V, u, mutation=None):
    """(P_h u)^n on interior times 1..nt-1 (rows 0 and nt are left at zero)."""
    dt, dx = grid.dt, grid.dx
    bad = mutation == "lattice_stencil"
    out = np.zeros_like(u)
    V = np.broadcast_to(V, u.shape)
    out[1:-1] = (-(u[2:] - 2 * u[1:-1] + u[:-2]) / dt**2 + lap(u[1:-1], dx, bad) - V[1:-1] * u[1:-1])
    return out


def point_source(grid: Grid1p1, n0: int, i0: int, mutation=None):
    f = np.zeros((grid.nt + 1, grid.nx))
    f[n0, i0 % grid.nx] = 1.0 if mutation == "lattice_source_scale" else 1.0 / (grid.dx * grid.dt)
    return f


def green_retarded(bg: BackgroundSolution, n0: int, i0: int, mutation=None):
    """Column Delta^r(., (n0, i0)): retarded solution with a point source."""
    grid = bg.grid
    f = point_source(grid, n0, i0, mutation)
    return solve_linear(grid, bg.potential(), f, mutation=mutation)


def green_advanced(bg: BackgroundSolution, n0: int, i0: int, mutation=None):
    """Advanced column, obtained by reflecting time, solving retarded, reflecting back."""
    grid = bg.grid
    V = bg.potential()[::-1]
    f = point_source(grid, grid.nt - n0, i0, mutation)
    return solve_linear(grid, V, f, mutation=mutation)[::-1].copy()


def causal_cone_mask(grid: Grid1p1, n0: int, i0: int):
    """True where a retarded column may be nonzero: n > n0 and |i - i0| <= n - n0 - 1."""
    n = np.arange(grid.nt + 1)[:, None]
    i = np.arange(grid.nx)[None, :]
    d = np.abs(i - i0 % grid.nx)
    d = np.minimum(d, grid.nx - d)
    return (n > n0) & (d <= n - n0 - 1)


def retarded_support_violation(col, grid, n0, i0) -> float:
    """max |column| outside the discrete cone (exactly 0 for an explicit stencil)."""
    mask = causal_cone_mask(grid, n0, i0)
    outside = np.abs(col[~mask])
    return float(outside.max()) if outside.size else 0.0


# ------------------------------------------------------------------ continuum references


def gaussian_source(grid: Grid1p1, tc, xc, st, sx):
    tt, xx = np.meshgrid(grid.t, grid.x, indexing="ij")
    return np.exp(-((tt - tc) / st) ** 2) * np.exp(-((xx - xc) / sx) ** 2)


def free_smeared_reference(grid: Grid1p1, tc, xc, st, sx, nq: int = 400):
    """Continuum retarded solution of box u = g(t) h(x) for Gaussians g, h.

    u(t, x) = -1/2 int_{t' < t} g(t') int_{|x - x'| < t - t'} h(x') dx' dt', the
    inner integral in closed form with erf, the outer by Gauss-Legendre.
    """
    from math import sqrt, pi

    from scipy.special import erf

    xs, ws = np.polynomial.legendre.leggauss(nq)
    tlo = max(0.0, tc - 8 * st)
    x = grid.x
    out = np.zeros((grid.nt + 1, grid.nx))
    for n, t in enumerate(grid.t):
        hi = min(t, tc + 8 * st)
        if hi <= tlo:
            continue
        tp = 0.5 * (hi - tlo) * xs + 0.5 * (hi + tlo)
        wt = 0.5 * (hi - tlo) * ws
        g = np.exp(-((tp - tc) / st) ** 2)
        r = (t - tp)[:, None]
        a = (x[None, :] + r - xc) / sx
        b = (x[None, :] - r - xc) / sx
        inner = 0.5 * sqrt(pi) * sx * (erf(a) - erf(b))
        out[n] = -0.5 * (wt * g) @ inner
    return out


def free_green_error(grid: Grid1p1, mutation=None) -> float:
    """max |Delta^r_h f - Delta^r f| for a smooth source, free massless case."""
    L = grid.length
    T = grid.nt * grid.dt
    tc, st = 0.25 * T, 0.06 * T
    xc, sx = 0.5 * L, 0.04 * L
    f = gaussian_source(grid, tc, xc, st, sx)
    if mutation == "lattice_source_scale":
        f = f * grid.dx * grid.dt
    uh = solve_linear(grid, 0.0, f, mutation=mutation)
    ref = free_smeared_reference(grid, tc, xc, st, sx)
    # compare only before the periodic images of the cone can meet
    tmax = 0.5 * L - 5 * sx + max(0.0, tc - 5 * st)
    rows = grid.t <= tmax
    return float(np.abs(uh - ref)[rows].max())


# ------------------------------------------------------------------ Moller maps


def retarded_wave_op(bg_from: BackgroundSolution, bg_to: BackgroundSolution, u, mutation=None,
                     past_rows: int = 2):
    """r u = u + Delta^r_to((P_from - P_to) u).

    The two linearized operators must coincide on the first ``past_rows``
    time rows (the perturbation has compact support in time).
    """
    grid = bg_from.grid
    dV = bg_to.potential() - bg_from.potential()
    if np.abs(dV[:past_rows]).max() > 0:
        raise SupportMismatch("backgrounds differ in the past: no retarded matching")
    # (P_from - P_to) u = (V_to - V_from) u
    src = dV * u
    w = solve_linear(grid, bg_to.potential(), src, mutation=mutation)
    sgn = -1.0 if mutation == "rop_sign" else 1.0
    return u + sgn * w


def free_solution(bg: BackgroundSolution, u0, pi0=None):
    """Solution of P_{bg} u = 0 from Cauchy data at t = 0."""
    grid = bg.grid
    dt = grid.dt
    u0 = np.asarray(u0, dtype=float)
    pi0 = np.zeros(grid.nx) if pi0 is None else np.asarray(pi0, dtype=float)
    V = bg.potential()
    u1 = u0 + dt * pi0 + 0.5 * dt**2 * (lap(u0, grid.dx) - V[0] * u0)
    return solve_linear(grid, V, 0.0, u0=u0, u1=u1)


def continuum_residual(grid: Grid1p1, V, u, margin: int = 2):
    """Fourth-order estimate of (box - V) u at interior points.

    Used to measure how well a lattice field solves the continuum equation;
    independent of the leapfrog stencil that produced u.
    """
    dt, dx = grid.dt, grid.dx
    V = np.broadcast_to(V, u.shape)
    c = (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)
    utt = (c[0] * u[:-4] + c[1] * u[1:-3] + c[2] * u[2:-2] + c[3] * u[3:-1] + c[4] * u[4:]) / dt**2
    mid = u[2:-2]
    uxx = (c[0] * np.roll(mid, 2, -1) + c[1] * np.roll(mid, 1, -1) + c[2] * mid
           + c[3] * np.roll(mid, -1, -1) + c[4] * np.roll(mid, -2, -1)) / dx**2
    res = -utt + uxx - V[2:-2] * mid
    return res[margin:len(res) - margin] if margin else res


def background_residual(bg: BackgroundSolution):
    """Fourth-order continuum residual of the background field equation."""
    grid = bg.grid
    phi = bg.phi
    V = bg.params.m**2 + bg.lam * phi**2 / 6
    return continuum_residual(grid, V, phi)


# ------------------------------------------------------------------ retarded variation


def eval_functional(coeffs, points, field):
    """F = sum_k c_k prod_j field(p_kj): polynomial evaluation functional."""
    total = 0.0
    for c, pts in zip(coeffs, points):
        v = c
        for n, i in pts:
            v *= field[n, i]
        total += v
    return total


def functional_gradient(coeffs, points, field):
    """dF/dfield as an array (one nonzero entry per evaluation point)."""
    g = np.zeros_like(field)
    for c, pts in zip(coeffs, points):
        for a, (n, i) in enumerate(pts):
            v = c
            for b, (m, j) in enumerate(pts):
                if b != a:
                    v *= field[m, j]
            g[n, i] += v
    return g


@dataclass
class RetvarSetup:
    grid: Grid1p1
    params: Params
    phi0: np.ndarray
    pi0: np.ndarray
    psi0: np.ndarray
    u0: np.ndarray
    coeffs: tuple
    points: tuple


def default_retvar_setup(grid: Grid1p1, params: Params) -> RetvarSetup:
    x = grid.x
    L = grid.length
    phi0 = 0.8 * np.exp(-((x - 0.45 * L) / (0.08 * L)) ** 2)
    pi0 = 0.3 * np.exp(-((x - 0.5 * L) / (0.1 * L)) ** 2)
    psi0 = 0.5 * np.exp(-((x - 0.55 * L) / (0.09 * L)) ** 2)
    u0 = 0.6 * np.exp(-((x - 0.5 * L) / (0.07 * L)) ** 2)
    T = grid.nt * grid.dt
    nq = int(round(0.9 * T / grid.dt))
    pts = lambda fx: (nq, int(round(fx * L / grid.dx)) % grid.nx)
    coeffs = (1.0, 0.5, -0.25)
    points = ((pts(0.5),), (pts(0.42), pts(0.58)), (pts(0.5), pts(0.5), pts(0.53)))
    return RetvarSetup(grid, params, phi0, pi0, psi0, u0, coeffs, points)


def _bg_family(st: RetvarSetup, s: float):
    return solve_background(st.grid, st.params, st.phi0 + s * st.psi0, st.pi0)


def moller_pullback_value(st: RetvarSetup, s: float, u):
    """F[phibar_s + r_{s,0} u] for a solution u of P_{phibar_0}."""
    bg0 = _bg_family(st, 0.0)
    bgs = _bg_family(st, s)
    ru = retarded_wave_op(bg0, bgs, u)
    return eval_functional(st.coeffs, st.points, bgs.phi + ru)


def retarded_variation(st: RetvarSetup, h: float, u=None):
    """Central difference (G(h) - G(-h)) / 2h of G(s) = F[phibar_s + r_{s,0} u]."""
    if not (0 < h < 0.5):
        raise StepTooLarge(f"step {h} outside (0, 0.5)")
    bg0 = _bg_family(st, 0.0)
    if u is None:
        u = free_solution(bg0, st.u0)
    gp = moller_pullback_value(st, h, u)
    gm = moller_pullback_value(st, -h, u)
    val = (gp - gm) / (2 * h)
    if not math.isfinite(val):
        raise StepTooLarge("difference quotient is not finite")
    return val


def chain_rule_variation(st: RetvarSetup, u=None):
    """<F', phibar' + Delta^r(lambda phibar phibar' u)> with phibar' from the linearized equation."""
    grid = st.grid
    bg0 = _bg_family(st, 0.0)
    if u is None:
        u = free_solution(bg0, st.u0)
    # phibar' solves P_{phibar} phibar' = 0 with data (psi0, 0); the leapfrog start
    # of the nonlinear solver linearizes to the same first step
    V = bg0.potential()
    psi = st.psi0
    lam0 = bg0.lam[0]
    u1 = psi + 0.5 * grid.dt**2 * (lap(psi, grid.dx) - st.params.m**2 * psi
                                   - 0.5 * lam0 * bg0.phi[0] ** 2 * psi)
    dphib = solve_linear(grid, V, 0.0, u0=psi, u1=u1)
    # d/ds r_{s,0} u = Delta^r_0( d/ds (V_s - V_0) u ) = Delta^r_0(lambda phibar phibar' u)
    src = bg0.lam * bg0.phi * dphib * u
    du = solve_linear(grid, V, src)
    g = functional_gradient(st.coeffs, st.points, bg0.phi + u)
    return float((g * (dphib + du)).sum())


def full_solution_value(st: RetvarSetup, data_shift: float, eps: float, u_data):
    """F on the full nonlinear solution with past data phibar + u + data_shift*psi (+ eps psi)."""
    phi0 = st.phi0 + u_data[0] + (data_shift + eps) * st.psi0
    pi0 = st.pi0 + u_data[1]
    sol = solve_background(st.grid, st.params, phi0, pi0)
    return eval_functional(st.coeffs, st.points, sol.phi)


def interacting_field(bg: BackgroundSolution, u, iters: int = 60, tol: float = 1e-13):
    """Yang-Feldman iteration: phi = u + Delta^r(lambda (phibar phi^2 / 2 + phi^3 / 6)).

    Returns the interacting perturbation around bg whose retarded free
    part is the solution u of P_{bg} u = 0.
    """
    grid = bg.grid
    V = bg.potential()
    phi = u.copy()
    for _ in range(iters):
        src = bg.lam * (bg.phi * phi**2 / 2 + phi**3 / 6)
        new = u + solve_linear(grid, V, src)
        if np.abs(new - phi).max() < tol:
            return new
        phi = new
    return phi


def linearized_solution(bg: BackgroundSolution, w0, w1=None):
    """Solution of the linearization of the discrete background scheme around bg.

    With w1 omitted the first step is the derivative of the Taylor start
    used by :func:`solve_background`, so this is the exact derivative of
    the discrete evolution with respect to the initial field.
    """
    grid = bg.grid
    V = bg.potential()
    w0 = np.asarray(w0, dtype=float)
    if w1 is None:
        w1 = w0 + 0.5 * grid.dt**2 * (lap(w0, grid.dx) - V[0] * w0)
    return solve_linear(grid, V, 0.0, u0=w0, u1=w1)


def classical_background_defect(st: RetvarSetup, h: float):
    """Discrete defect of the classical background-independence identity.

    Route 1 (retarded variation): central difference with step h of
    G(s) = F[phibar_s + Phi_s(r_{s,0} u)], Phi_s the interacting
    perturbation around phibar_s built by Yang-Feldman iteration.
    Route 2 (variation of the total field): the exact derivative
    <F', w> with w the linearized solution around the full field
    phibar + Phi(u) carrying the background variation data.
    Returns (defect, route1, route2); the defect is O(h^2).
    """
    if not (0 < h < 0.5):
        raise StepTooLarge(f"step {h} outside (0, 0.5)")
    bg0 = _bg_family(st, 0.0)
    u = free_solution(bg0, st.u0)

    def G1(s):
        bgs = _bg_family(st, s)
        ru = retarded_wave_op(bg0, bgs, u)
        return eval_functional(st.coeffs, st.points, bgs.phi + interacting_field(bgs, ru))

    d1 = (G1(h) - G1(-h)) / (2 * h)
    if not math.isfinite(d1):
        raise StepTooLarge("difference quotient is not finite")
    total = bg0.phi + interacting_field(bg0, u)
    full = BackgroundSolution(st.grid, st.params, total, bg0.lam)
    w = linearized_solution(full, st.psi0)
    d2 = float((functional_gradient(st.coeffs, st.points, total) * w).sum())
    return d1 - d2, d1, d2


def measured_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    e_coarse, e_fine = abs(float(e_coarse)), abs(float(e_fine))
    if e_fine <= 0 or e_coarse <= 0:
        return float("inf") if e_fine == 0 and e_coarse > 0 else float("nan")
    return math.log(e_coarse / e_fine) / math.log(ratio)


def dump_matrix(path, arr):
    """Plain-text matrix, one time row per line."""
    np.savetxt(path, np.asarray(arr), fmt="%.12e")
