"""Finite-dimensional star products.

Spacetime is replaced by a finite set of sites.  A functional is a graded
polynomial in the field values with coefficients polynomial in a formal
hbar, and

    F * G = sum_k hbar^k / k!  m( Gamma^k (F (x) G) ),
    Gamma = sum_ij w_ij  dR/dx_i (x) dL/dx_j .

Fermionic convention: Gamma pairs a right derivative on the left factor
with a left derivative on the right factor, so no sign is picked up when
Gamma is applied; w may only pair variables of equal parity, which keeps
Gamma even.  The factor i of the commutator is absorbed into hbar.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from .expr.num import Q
from pathlib import Path

from .errors import GradingMismatch, SpaceMismatch
from .expr import letters as L
from .expr.poly import Poly, fmt_poly

GAUGE_COMPONENTS = (("A", 0, 0), ("B", 0, 0), ("C", 1, 1), ("Cb", 1, -1))


@dataclass(frozen=True)
class FiniteFieldSpace:
    """Field values on n sites; scalar mode has one even component per site."""

    sites: int
    mode: str = "scalar"

    def __post_init__(self):
        if self.sites < 1:
            raise ValueError("need at least one site")
        if self.mode not in ("scalar", "gauge"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def components(self):
        return (("phi", 0, 0),) if self.mode == "scalar" else GAUGE_COMPONENTS

    @property
    def dim(self) -> int:
        return self.sites * len(self.components)

    def index(self, comp: str, site: int) -> int:
        names = [c[0] for c in self.components]
        return (site % self.sites) * len(names) + names.index(comp)

    def label(self, i: int):
        k = len(self.components)
        return self.components[i % k][0], i // k

    def parity(self, i: int) -> int:
        return self.components[i % len(self.components)][1]

    def ghost(self, i: int) -> int:
        return self.components[i % len(self.components)][2]

    def var(self, i: int) -> int:
        comp, site = self.label(i)
        lid = L.lid_of("sf_" + comp, (site,), (), False, self.parity(i))
        return lid << 2

    def variables(self):
        return [self.var(i) for i in range(self.dim)]

    def index_of_var(self, v: int) -> int:
        let = L.get(v >> 2)
        return self.index(let.name[3:], let.idx[0])

    def x(self, i: int) -> "HPoly":
        return HPoly({0: Poly.var(self.var(i))}, self)


class HPoly:
    """Polynomial in hbar with graded polynomial coefficients."""

    __slots__ = ("c", "space")

    def __init__(self, c: dict, space: FiniteFieldSpace):
        self.c = {k: p for k, p in c.items() if p}
        self.space = space

    @staticmethod
    def const(v, space) -> "HPoly":
        return HPoly({0: Poly.const(v)}, space)

    def _chk(self, o):
        if o.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {o.space}")

    def __add__(self, o):
        self._chk(o)
        out = {k: p.copy() for k, p in self.c.items()}
        for k, p in o.c.items():
            out[k] = out[k] + p if k in out else p
        return HPoly(out, self.space)

    def __sub__(self, o):
        return self + (-o)

    def __neg__(self):
        return HPoly({k: -p for k, p in self.c.items()}, self.space)

    def scale(self, s):
        return HPoly({k: p.scale(Q(s)) for k, p in self.c.items()}, self.space)

    def __mul__(self, o):
        """Pointwise (commutative graded) product."""
        self._chk(o)
        out: dict = {}
        for a, p in self.c.items():
            for b, q in o.c.items():
                r = p * q
                out[a + b] = out[a + b] + r if a + b in out else r
        return HPoly(out, self.space)

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, o):
        return isinstance(o, HPoly) and (self - o).is_zero()

    def at_hbar0(self) -> Poly:
        return self.c.get(0, Poly())

    def parity(self):
        ps = {p.parity() for p in self.c.values()}
        if None in ps or len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def degrees(self) -> set:
        """Set of Deg = 2 deg_hbar + deg_field over all terms."""
        return {2 * k + len(m) for k, p in self.c.items() for m in p.t}

    def __repr__(self):
        return " + ".join(f"hbar^{k}*({fmt_poly(p)})" for k, p in sorted(self.c.items())) or "0"


class KernelMatrix:
    """Square matrix of exact rationals indexed by a finite field space."""

    def __init__(self, rows, space: FiniteFieldSpace):
        rows = [[Q(v) for v in r] for r in rows]
        n = space.dim
        if len(rows) != n or any(len(r) != n for r in rows):
            raise SpaceMismatch(f"kernel must be {n}x{n}")
        for i in range(n):
            for j in range(n):
                if rows[i][j] and space.parity(i) != space.parity(j):
                    raise GradingMismatch(f"kernel pairs variables of different parity at ({i},{j})")
        self.w = rows
        self.space = space

    def entries(self):
        for i, r in enumerate(self.w):
            for j, v in enumerate(r):
                if v:
                    yield i, j, v

    def copy(self) -> "KernelMatrix":
        return KernelMatrix([list(r) for r in self.w], self.space)

    def transpose(self) -> "KernelMatrix":
        n = self.space.dim
        return KernelMatrix([[self.w[j][i] for j in range(n)] for i in range(n)], self.space)


def parse_kernel(text: str, space: FiniteFieldSpace) -> KernelMatrix:
    """Rows of whitespace separated rationals such as 1, -2, 3/4; '#' starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([Q(tok) for tok in line.split()])
    return KernelMatrix(rows, space)


def load_kernel(path, space: FiniteFieldSpace) -> KernelMatrix:
    return parse_kernel(Path(path).read_text(), space)


def dump_kernel(k: KernelMatrix) -> str:
    return "\n".join(" ".join(str(v) for v in r) for r in k.w) + "\n"


# ------------------------------------------------------------------ star


def _gamma(pairs, w: KernelMatrix):
    """One application of Gamma on a list of (coef, f, g) tensor terms."""
    sp = w.space
    out = []
    ents = list(w.entries())
    for f, g in pairs:
        fv = f.variables()
        gv = g.variables()
        if not fv or not gv:
            continue
        for i, j, c in ents:
            vi, vj = sp.var(i), sp.var(j)
            if vi not in fv or vj not in gv:
                continue
            df = f.deriv(vi, "R")
            dg = g.deriv(vj, "L")
            if df and dg:
                out.append((df.scale(c), dg))
    return out


def star(F: HPoly, G: HPoly, w: KernelMatrix, factorials: bool = True) -> HPoly:
    if F.space != G.space or w.space != F.space:
        raise SpaceMismatch("star product of functionals on different spaces")
    out: dict = {}
    for a, f in F.c.items():
        for b, g in G.c.items():
            pairs = [(f, g)]
            k = 0
            fact = 1
            while pairs:
                acc = Poly()
                for x, y in pairs:
                    acc.iadd(x * y)
                if acc:
                    coef = Q(1, fact) if factorials else Q(1)
                    key = a + b + k
                    term = acc.scale(coef)
                    out[key] = out[key] + term if key in out else term
                k += 1
                fact *= k
                pairs = _gamma(pairs, w)
    return HPoly(out, F.space)


# ------------------------------------------------------------------ random data


def random_poly(rng: random.Random, space: FiniteFieldSpace, max_deg: int, parity=None,
                nterms: int = 3, hbar: bool = False) -> HPoly:
    """Random grade-homogeneous polynomial (fixed parity), coefficients in [-3, 3]."""
    n = space.dim
    if parity is None:
        parity = rng.randrange(2) if space.mode == "gauge" else 0
    out = HPoly({}, space)
    for _ in range(nterms * 4):
        if len([1 for p in out.c.values() for _ in p.t]) >= nterms:
            break
        deg = rng.randrange(0, max_deg + 1)
        idx = [rng.randrange(n) for _ in range(deg)]
        if sum(space.parity(i) for i in idx) % 2 != parity:
            continue
        m = HPoly.const(rng.choice([-3, -2, -1, 1, 2, 3]), space)
        for i in idx:
            m = m * space.x(i)
        if hbar and rng.random() < 0.3:
            m = HPoly({k + 1: p for k, p in m.c.items()}, space)
        out = out + m
    return out


def random_kernel(rng: random.Random, space: FiniteFieldSpace, lo: int = -3, hi: int = 3) -> KernelMatrix:
    n = space.dim
    rows = [[Q(rng.randint(lo, hi)) if space.parity(i) == space.parity(j) else Q(0)
             for j in range(n)] for i in range(n)]
    return KernelMatrix(rows, space)


def _spawn(seed, k):
    return random.Random(f"{seed}:{k}")


def check_associativity(w: KernelMatrix, trials: int = 100, max_deg: int = 3, seed: int = 0,
                        factorials: bool = True) -> dict:
    sp = w.space
    failures = []
    for t in range(trials):
        rng = _spawn(seed, t)
        F, G, H = (random_poly(rng, sp, max_deg, hbar=True) for _ in range(3))
        d = star(star(F, G, w, factorials), H, w, factorials) - star(F, star(G, H, w, factorials), w, factorials)
        if not d.is_zero():
            failures.append({"trial": t, "defect": repr(d)[:200]})
    return {"trials": trials, "failures": failures, "ok": not failures}


# ------------------------------------------------------------------ derivations


def _check_grading(K, sp: FiniteFieldSpace):
    n = sp.dim
    for a in range(n):
        for c in range(n):
            if K[a][c] and sp.ghost(c) != sp.ghost(a) + 1:
                raise GradingMismatch(
                    f"K maps {sp.label(a)} to {sp.label(c)}: ghost number must rise by one")


def derivation(K, sp: FiniteFieldSpace):
    """Odd derivation with x_a -> sum_c K[a][c] x_c, acting on HPoly."""
    _check_grading(K, sp)
    imgs = {}
    for a in range(sp.dim):
        p = Poly()
        for c, v in enumerate(K[a]):
            if v:
                p.iadd(Poly.var(sp.var(c)), v)
        imgs[sp.var(a)] = p

    def apply(F: HPoly) -> HPoly:
        return HPoly({k: p.derive(lambda v: imgs.get(v), 1) for k, p in F.c.items()}, sp)

    return apply


def intertwines(K, w: KernelMatrix) -> bool:
    """K w + Sigma w K^T = 0 with Sigma = diag((-1)^{|a|})."""
    sp = w.space
    n = sp.dim
    _check_grading(K, sp)
    for a in range(n):
        sa = -1 if sp.parity(a) else 1
        for b in range(n):
            v = sum((K[a][c] * w.w[c][b] for c in range(n)), Q(0))
            v += sa * sum((w.w[a][c] * K[b][c] for c in range(n)), Q(0))
            if v:
                return False
    return True


def leibniz_defects(K, w: KernelMatrix, trials: int = 12, max_deg: int = 2, seed: int = 0):
    """Brute-force defect d(F*G) - dF*G - (-1)^|F| F*dG on generators and random polynomials."""
    sp = w.space
    d = derivation(K, sp)
    family = [sp.x(i) for i in range(sp.dim)]
    rng = _spawn(seed, "leib")
    family += [random_poly(rng, sp, max_deg, nterms=2) for _ in range(trials)]
    out = []
    for i, F in enumerate(family):
        pF = F.parity() or 0
        for j, G in enumerate(family):
            if i >= sp.dim and j >= sp.dim and (i + j) % 3:
                continue
            lhs = d(star(F, G, w))
            rhs = star(d(F), G, w) + star(F, d(G), w).scale(-1 if pF else 1)
            diff = lhs - rhs
            if not diff.is_zero():
                out.append((i, j, diff))
    return out


def check_derivation_compat(K, w: KernelMatrix, seed: int = 0, trials: int = 12,
                            mutation=None) -> dict:
    w_int = w.transpose() if mutation == "kernel_transpose" else w
    inter = intertwines(K, w_int)
    defects = leibniz_defects(K, w, trials=trials, seed=seed)
    return {
        "intertwining": inter,
        "derivation": not defects,
        "agree": inter == (not defects),
        "defect": repr(defects[0][2])[:200] if defects else "0",
    }


# ------------------------------------------------------------------ chain model


def chain_difference(n: int):
    """Forward difference on a periodic chain: (Dv)_x = v_{x+1} - v_x."""
    return [[Q((1 if y == (x + 1) % n else 0) - (1 if y == x else 0)) for y in range(n)]
            for x in range(n)]


def _mat(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Q(0)) for j in range(n)] for i in range(n)]


def _t(a):
    return [list(r) for r in zip(*a)]


def chain_s0(sp: FiniteFieldSpace):
    """Finite free BRST map: A -> D C, Cbar -> B, B and C -> 0."""
    n = sp.sites
    K = [[Q(0)] * sp.dim for _ in range(sp.dim)]
    Dm = chain_difference(n)
    for x in range(n):
        for y in range(n):
            if Dm[x][y]:
                K[sp.index("A", x)][sp.index("C", y)] = Dm[x][y]
        K[sp.index("Cb", x)][sp.index("B", x)] = Q(1)
    return K


def chain_kernel(sp: FiniteFieldSpace, wv, ws) -> KernelMatrix:
    """Block kernel with w_AA = wv, w_AB = D ws, w_BA = ws D^T, w_CCb = -ws, w_CbC = ws."""
    n = sp.sites
    Dm = chain_difference(n)
    wab = _mat(Dm, ws)
    wba = _mat(ws, _t(Dm))
    rows = [[Q(0)] * sp.dim for _ in range(sp.dim)]
    for x in range(n):
        for y in range(n):
            rows[sp.index("A", x)][sp.index("A", y)] = Q(wv[x][y])
            rows[sp.index("A", x)][sp.index("B", y)] = wab[x][y]
            rows[sp.index("B", x)][sp.index("A", y)] = wba[x][y]
            rows[sp.index("C", x)][sp.index("Cb", y)] = -Q(ws[x][y])
            rows[sp.index("Cb", x)][sp.index("C", y)] = Q(ws[x][y])
    return KernelMatrix(rows, sp)


# ------------------------------------------------------------------ on-shell ideal


def _nullspace(P):
    """Rational basis of ker P (columns returned as lists)."""
    m = [list(map(Q, r)) for r in P]
    rows, n = len(m), len(m[0])
    piv = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Q(0)] * n
        v[f] = Q(1)
        for i, c in enumerate(piv):
            v[c] = -m[i][f]
        basis.append(v)
    return basis


def restrict_to_kernel(F: HPoly, P) -> dict:
    """Substitute x = N y (N spans ker P); returns hbar-power -> Poly in y."""
    sp = F.space
    N = _nullspace(P)
    ys = [L.lid_of("sf_y", (k,), (), False, 0) << 2 for k in range(len(N))]
    img = {}
    for i in range(sp.dim):
        p = Poly()
        for k, col in enumerate(N):
            if col[i]:
                p.iadd(Poly.var(ys[k]), col[i])
        img[sp.var(i)] = p
    return {k: p.subst(lambda v: img.get(v)) for k, p in F.c.items()}


def vanishes_on_solutions(F: HPoly, P) -> bool:
    return all(not p for p in restrict_to_kernel(F, P).values())


def bisolution_kernel(rng: random.Random, sp: FiniteFieldSpace, P) -> KernelMatrix:
    """w = N M N^T, so that P w = 0 and w P^T = 0."""
    N = _nullspace(P)
    r = len(N)
    M = [[Q(rng.randint(-3, 3)) for _ in range(r)] for _ in range(r)]
    n = sp.dim
    rows = [[sum((N[a][i] * M[a][b] * N[b][j] for a in range(r) for b in range(r)), Q(0))
             for j in range(n)] for i in range(n)]
    return KernelMatrix(rows, sp)


def ideal_element(rng: random.Random, sp: FiniteFieldSpace, P, max_deg: int = 2) -> HPoly:
    """sum_i (P x)_i G_i with random G_i."""
    out = HPoly({}, sp)
    for row in P:
        lin = HPoly({}, sp)
        for j, v in enumerate(row):
            if v:
                lin = lin + sp.x(j).scale(v)
        out = out + lin * random_poly(rng, sp, max_deg, parity=0, nterms=2)
    return out


def check_ideal(sp: FiniteFieldSpace, P, w: KernelMatrix, trials: int = 10, seed: int = 0) -> dict:
    """Do J0 elements stay in J0 under left and right star multiplication?"""
    bad = 0
    for t in range(trials):
        rng = _spawn(seed, ("ideal", t))
        F = ideal_element(rng, sp, P)
        if not vanishes_on_solutions(F, P):
            raise AssertionError("ideal element does not vanish on solutions")
        G = random_poly(rng, sp, 2, parity=0, nterms=3)
        if not (vanishes_on_solutions(star(F, G, w), P) and vanishes_on_solutions(star(G, F, w), P)):
            bad += 1
    return {"trials": trials, "escapes": bad, "ideal": bad == 0}
