"""Suites for the finite-dimensional star product."""
from __future__ import annotations

from ..expr.num import Q
from ..expr.poly import Poly
from ..starform import (
    FiniteFieldSpace,
    HPoly,
    KernelMatrix,
    bisolution_kernel,
    chain_kernel,
    chain_s0,
    check_associativity,
    check_derivation_compat,
    check_ideal,
    random_kernel,
    random_poly,
    star,
)
from .registry import Outcome, Randomization, suite


def _factorials(rc) -> bool:
    return rc.mutation != "star_no_factorial"


@suite("star_commutator", "Star commutators of linear fields equal hbar times the antisymmetrized "
       "kernel and are central; star products add the grading Deg; the unit is neutral.",
       randomization=Randomization(trials=20, max_degree=3))
def star_commutator(rc):
    rng = rc.rng()
    fac = _factorials(rc)
    checked = 0
    for sp in (FiniteFieldSpace(4), FiniteFieldSpace(2, "gauge")):
        w = random_kernel(rng, sp)
        n = sp.dim
        one = HPoly.const(1, sp)
        for i in range(n):
            xi = sp.x(i)
            for j in range(n):
                xj = sp.x(j)
                sgn = -1 if sp.parity(i) and sp.parity(j) else 1
                comm = star(xi, xj, w, fac) - star(xj, xi, w, fac).scale(sgn)
                c = w.w[i][j] - sgn * w.w[j][i]
                expect = HPoly({1: Poly.const(c)} if c else {}, sp)
                if comm != expect:
                    return Outcome(False, f"[x{i}, x{j}] = {comm!r}")
        for t in range(10):
            F = random_poly(rng, sp, rc.cfg["star"]["max_deg"], hbar=True)
            G = random_poly(rng, sp, rc.cfg["star"]["max_deg"], hbar=True)
            if star(one, F, w, fac) != F or star(F, one, w, fac) != F:
                return Outcome(False, f"unit fails on {F!r}")
            i, j = rng.randrange(n), rng.randrange(n)
            sgn = -1 if sp.parity(i) and sp.parity(j) else 1
            c = star(sp.x(i), sp.x(j), w, fac) - star(sp.x(j), sp.x(i), w, fac).scale(sgn)
            if star(c, F, w, fac) != star(F, c, w, fac):
                return Outcome(False, f"commutator of x{i}, x{j} not central against {F!r}")
            if F.is_zero() or G.is_zero():
                continue
            prod = star(F, G, w, fac)
            sums = {a + b for a in F.degrees() for b in G.degrees()}
            if not prod.degrees() <= sums:
                return Outcome(False, f"Deg not additive: {sorted(prod.degrees())} vs {sorted(sums)}")
            if len(F.degrees()) == 1 and len(G.degrees()) == 1 and not prod.is_zero() \
                    and prod.degrees() != sums:
                return Outcome(False, f"Deg not additive: {sorted(prod.degrees())} vs {sorted(sums)}")
            checked += 1
    return Outcome(True, "0", {"deg_checks": checked})


@suite("star_assoc", "The star product built from the exponential of the kernel pairing is "
       "associative on random triples, for even and mixed-parity fields.",
       randomization=Randomization(trials=100, max_degree=3))
def star_assoc(rc):
    trials = rc.trials("star_assoc")
    sites = rc.cfg["star"]["sites"]
    max_deg = rc.cfg["star"]["max_deg"]
    rng = rc.rng()
    fac = _factorials(rc)
    half = trials // 2
    runs = []
    sp = FiniteFieldSpace(min(sites, 6))
    runs.append((random_kernel(rng, sp), trials - half, "scalar"))
    gs = FiniteFieldSpace(min(2, sites), "gauge")
    runs.append((random_kernel(rng, gs), half, "gauge"))
    for w, n, label in runs:
        rep = check_associativity(w, trials=n, max_deg=max_deg, seed=rc.seed, factorials=fac)
        if not rep["ok"]:
            f = rep["failures"][0]
            return Outcome(False, f"{label} trial {f['trial']}: {f['defect']}",
                           {"failures": len(rep["failures"])})
    return Outcome(True, "0", {"trials": trials})


def _perturb(w: KernelMatrix, a: int, b: int) -> KernelMatrix:
    rows = [list(r) for r in w.w]
    rows[a][b] = rows[a][b] + Q(1)
    return KernelMatrix(rows, w.space)


@suite("star_derivation", "The intertwining relation between the linear BRST map and the kernel "
       "holds exactly when the induced map is a graded star derivation, on compatible and "
       "deliberately broken kernels.", randomization=Randomization(trials=20, max_degree=2))
def star_derivation(rc):
    total = rc.trials("star_kernels")
    rng = rc.rng()
    sp = FiniteFieldSpace(3, "gauge")
    K = chain_s0(sp)
    zero = [[Q(0)] * sp.dim for _ in range(sp.dim)]
    n = sp.sites
    cases = []
    n_bad = max(5, total // 3)
    for k in range(total):
        wv = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        ws = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        w = chain_kernel(sp, wv, ws)
        if k < n_bad:
            # break the ghost block or the A-B block: never compatible
            x, y = rng.randrange(n), rng.randrange(n)
            if k % 2:
                w = _perturb(w, sp.index("C", x), sp.index("Cb", y))
            else:
                w = _perturb(w, sp.index("A", x), sp.index("B", y))
            cases.append((K, w, False))
        elif k == n_bad:
            cases.append((zero, random_kernel(rng, sp), True))
        else:
            cases.append((K, w, True))
    incompatible = 0
    for k, (Kk, w, expect) in enumerate(cases):
        rep = check_derivation_compat(Kk, w, seed=rc.seed + k, mutation=rc.mutation)
        if not rep["agree"]:
            return Outcome(False, f"kernel {k}: intertwining={rep['intertwining']} but derivation="
                                  f"{rep['derivation']} (defect {rep['defect']})")
        if rep["intertwining"] != expect:
            return Outcome(False, f"kernel {k}: expected compatible={expect}")
        incompatible += not expect
    return Outcome(True, "0", {"kernels": len(cases), "incompatible": incompatible})


@suite("star_ideal", "Functionals vanishing on all solutions of a finite field equation form a "
       "two-sided star ideal when the kernel is a bisolution, and not for a generic kernel.",
       randomization=Randomization(trials=10, max_degree=2))
def star_ideal(rc):
    rng = rc.rng()
    sp = FiniteFieldSpace(4)
    P = [[1, 1, 0, 0], [0, 1, -1, 0]]
    good = check_ideal(sp, P, bisolution_kernel(rng, sp, P), trials=10, seed=rc.seed)
    if not good["ideal"]:
        return Outcome(False, f"{good['escapes']} products escaped the ideal")
    bad = check_ideal(sp, P, random_kernel(rng, sp), trials=10, seed=rc.seed)
    if bad["ideal"]:
        return Outcome(False, "generic kernel also preserved the ideal: check is vacuous")
    return Outcome(True)
