"""Covariant jet space of the background-split theories.

Coordinates are symmetrized background-covariant derivatives
X_(a1..ak) = sym(D_a1 ... D_ak X) of every field, plus the jets of the
background curvature Fbar.  The background connection itself never shows
up: everything is expressed through these covariant coordinates, which is
what makes the on-shell condition D^mu Fbar_{mu nu} = 0 a plain linear
relation among coordinates.

Total derivative.  With [D_mu, D_nu] X = [Fbar_{mu nu}, X] one has
D_mu X_(alpha) = X_(mu alpha) + c(mu, alpha) where c(mu, ()) = 0 and

    c(mu, alpha) = -1/(k+1) sum_i ( D_mu c(a_i, b_i) - D_{a_i} c(mu, b_i)
                                    + [Fbar_{a_i mu}, X_(b_i)] ),

b_i = alpha without its i-th entry, k = |alpha|.  Scalar fields use plain
partial derivatives.

Relations.  Bianchi identities of Fbar, optionally the background field
equation and the linearized equation for variation fields, are prolonged
order by order with D and row reduced on their linear top parts.  Pivot
("principal") coordinates are substituted away.  A prolonged row whose top
part cancels must reduce to zero; otherwise an integrability condition is
missing and InconsistentRelations is raised.
"""
from __future__ import annotations

from .num import Q
from itertools import combinations

from ..errors import InconsistentRelations
from . import letters as L
from .letters import DIM, ETA

# name: (lie valued, index shape, parity, ghost, mass dim)
# index shape entries: 'lo' lower spacetime index, 'up' upper.
FIELDS = {
    "A": (True, ("lo",), 0, 0, 1),
    "B": (True, (), 0, 0, 2),
    "C": (True, (), 1, 1, 0),
    "Cb": (True, (), 1, -1, 2),
    "As": (True, ("up",), 1, -1, 3),
    "Bs": (True, (), 1, -1, 2),
    "Cs": (True, (), 0, -2, 4),
    "Cbs": (True, (), 0, 0, 2),
    "a": (True, ("lo",), 0, 0, 1),
    "a2": (True, ("lo",), 0, 0, 1),
    "F": (True, ("lo", "lo"), 0, 0, 2),
    "lam": (False, (), 0, 0, 0),
    "phi": (False, (), 0, 0, 1),
    "phib": (False, (), 0, 0, 1),
    "phip": (False, (), 0, 0, 1),
    "phiq": (False, (), 0, 0, 1),
    "m": (False, (), 0, 0, 1),
}

# formal parameters: constant in spacetime
CONSTANTS = frozenset({"m"})

YM_FIELDS = ("A", "B", "C", "Cb")
YM_ANTIFIELDS = ("As", "Bs", "Cs", "Cbs")
PARTNER = dict(zip(YM_FIELDS, YM_ANTIFIELDS))


def field_lid(name: str, idx=(), jet=()) -> int:
    lie, shape, par, _, _ = FIELDS[name]
    return L.lid_of(name, tuple(idx), tuple(sorted(jet)), lie, par)


def components(name: str):
    """All index tuples of a field (Fbar stored with mu < nu)."""
    shape = FIELDS[name][1]
    if name == "F":
        return list(combinations(range(DIM), 2))
    if not shape:
        return [()]
    return [(m,) for m in range(DIM)]


def multi_indices(order: int):
    """Sorted multi-indices of a given length."""
    if order == 0:
        return [()]
    out = []

    def rec(prefix, start):
        if len(prefix) == order:
            out.append(tuple(prefix))
            return
        for m in range(start, DIM):
            rec(prefix + [m], m)

    rec([], 0)
    return out


def remove_one(jet: tuple, i: int) -> tuple:
    return jet[:i] + jet[i + 1:]


class JetSpace:
    """Jet coordinates, total derivatives and relations for one backend."""

    def __init__(self, backend, bg_onshell: bool = False, onshell_vars=(), max_order: int = 12):
        self.B = backend
        self.bg_onshell = bg_onshell
        self.onshell_vars = tuple(onshell_vars)
        if self.onshell_vars and not bg_onshell:
            raise InconsistentRelations("on-shell variations need an on-shell background")
        self.max_order = max_order
        self.red: dict[int, object] = {}
        self.level = 0
        self._building = False
        self._dcache: dict = {}
        self._ccache: dict = {}
        self._gens: dict = {}
        self.stats = {"pivots": 0, "checked": 0}

    # ------------------------------------------------------------ coordinates

    def letter(self, name, idx=(), jet=()):
        """Element for a coordinate, reduced; handles Fbar antisymmetry."""
        if name == "F":
            m, n = idx
            if m == n:
                return self.B.zero_l()
            if m > n:
                return -self.letter(name, (n, m), jet)
        lid = field_lid(name, idx, jet)
        return self.elem(lid)

    def raw(self, lid):
        if L.get(lid).lie:
            return self.B.lie(lid)
        return self.B.scalar(lid)

    def elem(self, lid):
        let = L.get(lid)
        if let.lie and let.order and not self._building:
            self.ensure_order(let.order)
        r = self.red.get(lid)
        if r is not None:
            return r
        return self.raw(lid)

    def fbar(self, m, n):
        return self.letter("F", (m, n))

    # ------------------------------------------------------------ derivatives

    def D(self, mu: int, x):
        """Covariant total derivative (a plain total derivative on scalars)."""
        return self.B.derive(x, lambda lid: self.dletter(mu, lid), 0)

    def dletter(self, mu: int, lid: int):
        key = (mu, lid)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        let = L.get(lid)
        up = L.shift_jet(lid, mu)
        if not let.lie:
            val = self.B.zero_s() if let.name in CONSTANTS else self.B.scalar(up)
        else:
            if not self._building:
                self.ensure_order(let.order + 1)
            if let.order + 1 > self.max_order:
                raise InconsistentRelations(f"jet order above cap {self.max_order}")
            val = self.elem(up) + self.corr(mu, lid)
        self._dcache[key] = val
        return val

    def corr(self, mu: int, lid: int):
        """c(mu, alpha) for the letter lid = X_(alpha)."""
        key = (mu, lid)
        hit = self._ccache.get(key)
        if hit is not None:
            return hit
        let = L.get(lid)
        k = let.order
        if k == 0:
            val = self.B.zero_l()
        else:
            acc = self.B.zero_l()
            for i, a in enumerate(let.jet):
                y = L.intern(let.with_jet(remove_one(let.jet, i)))
                acc = acc + self.D(mu, self.corr(a, y))
                acc = acc - self.D(a, self.corr(mu, y))
                acc = acc + self.fbar(a, mu).bracket(self.elem(y))
            val = acc.scale(Q(-1, k + 1))
        self._ccache[key] = val
        return val

    def Dsym(self, alpha: tuple, x):
        """Symmetrized covariant derivative sym(D_a1 ... D_ak) x."""
        if not alpha:
            return x
        acc = None
        k = len(alpha)
        seen = {}
        for i, a in enumerate(alpha):
            b = remove_one(alpha, i)
            kb = (a, b)
            if kb in seen:
                seen[kb] += 1
                continue
            seen[kb] = 1
        for (a, b), mult in seen.items():
            term = self.D(a, self.Dsym(b, x)).scale(Q(mult, k))
            acc = term if acc is None else acc + term
        return acc

    # ------------------------------------------------------------ relations

    def _base_rows(self, k: int):
        rows = []
        if k == 1:
            for lam, mu, nu in combinations(range(DIM), 3):
                r = (self._rawF(lam, mu, nu) + self._rawF(mu, nu, lam) + self._rawF(nu, lam, mu))
                rows.append(("F", r))
            if self.bg_onshell:
                for nu in range(DIM):
                    r = self.B.zero_l()
                    for mu in range(DIM):
                        if mu != nu:
                            r = r + self._rawF(mu, mu, nu).scale(ETA[mu])
                    rows.append(("F", r))
        if k == 2:
            for name in self.onshell_vars:
                for mu in range(DIM):
                    rows.append((name, self.plin(name, mu)))
        return rows

    def _rawF(self, d, m, n):
        if m == n:
            return self.B.zero_l()
        if m > n:
            return -self._rawF(d, n, m)
        return self.B.lie(field_lid("F", (m, n), (d,)))

    def plin(self, name: str, mu: int):
        """(Pbar^lin v)_mu = D^nu (D_nu v_mu - D_mu v_nu) + [Fbar_{mu nu}, v^nu]."""
        B = self.B
        acc = B.zero_l()
        for nu in range(DIM):
            g = self.D(nu, self.letter(name, (mu,))) - self.D(mu, self.letter(name, (nu,)))
            acc = acc + self.D(nu, g).scale(ETA[nu])
            acc = acc + self.fbar(mu, nu).bracket(self.letter(name, (nu,))).scale(ETA[nu])
        return acc

    def ensure_order(self, n: int):
        while self.level < n:
            if self.level + 1 > self.max_order:
                raise InconsistentRelations(f"jet order above cap {self.max_order}")
            self._build(self.level + 1)

    def _reduce(self, x):
        red = self.red
        if not red:
            return x
        return self.B.subst(x, red.get)

    def _build(self, k: int):
        self._building = True
        try:
            rows = self._base_rows(k)
            for fam, g in self._gens.get(k - 1, []):
                for rho in range(DIM):
                    rows.append((fam, self.D(rho, g)))
            gens = []
            for fam in ["F"] + list(self.onshell_vars):
                frows = [self._reduce(r) for f, r in rows if f == fam]
                if not frows:
                    continue
                gens.extend((fam, g) for g in self._eliminate(fam, k, frows))
            self._gens[k] = gens
            self.level = k
            self._refresh()
        finally:
            self._building = False

    def _refresh(self):
        for cache in (self._dcache, self._ccache):
            for key, val in list(cache.items()):
                cache[key] = self._reduce(val)

    def _linear_top(self, x, fam: str, k: int):
        B = self.B
        top = {}

        def ok(lid):
            let = L.get(lid)
            return let.name == fam and let.order == k

        if B.name == "su2":
            for mono, c in x.c[0].t.items():
                if len(mono) == 1 and (mono[0] & 3) == 1 and ok(mono[0] >> 2):
                    top[mono[0] >> 2] = c
        else:
            for (plain, traces, w), c in x.t.items():
                if not plain and not traces and len(w) == 1 and ok(w[0]):
                    top[w[0]] = c
        return top

    def _eliminate(self, fam: str, k: int, rows):
        B = self.B
        # tails are kept as combinations of the original rows
        work = []
        for i, r in enumerate(rows):
            top = self._linear_top(r, fam, k)
            work.append((top, {i: Q(1)}))
        pivots: dict[int, tuple] = {}
        order = lambda lid: L.sort_key(lid)
        zero_rows = []
        for top, comb in work:
            top = dict(top)
            comb = dict(comb)
            for p, (ptop, pcomb) in pivots.items():
                c = top.get(p)
                if c:
                    for q, v in ptop.items():
                        w = top.get(q, 0) - c * v
                        if w:
                            top[q] = w
                        else:
                            top.pop(q, None)
                    for q, v in pcomb.items():
                        w = comb.get(q, 0) - c * v
                        if w:
                            comb[q] = w
                        else:
                            comb.pop(q, None)
            if not top:
                zero_rows.append(comb)
                continue
            p = max(top, key=order)
            c = top[p]
            top = {q: v / c for q, v in top.items()}
            comb = {q: v / c for q, v in comb.items()}
            for p2, (ptop, pcomb) in list(pivots.items()):
                c2 = ptop.get(p)
                if c2:
                    nt = dict(ptop)
                    nc = dict(pcomb)
                    for q, v in top.items():
                        w = nt.get(q, 0) - c2 * v
                        if w:
                            nt[q] = w
                        else:
                            nt.pop(q, None)
                    for q, v in comb.items():
                        w = nc.get(q, 0) - c2 * v
                        if w:
                            nc[q] = w
                        else:
                            nc.pop(q, None)
                    pivots[p2] = (nt, nc)
            pivots[p] = (top, comb)

        def combine(comb):
            acc = B.zero_l()
            for i, c in comb.items():
                acc = acc + rows[i].scale(c)
            return acc

        new_red = {}
        gens = []
        for p in sorted(pivots, key=order):
            ptop, pcomb = pivots[p]
            rel = combine(pcomb)
            # rel = p + sum_q c_q q + tail = 0 with every q free
            expr = B.lie(p) - rel
            new_red[p] = expr
            gens.append(B.lie(p) - expr)
        self.red.update(new_red)
        self.stats["pivots"] += len(new_red)
        for comb in zero_rows:
            rel = self._reduce(combine(comb))
            self.stats["checked"] += 1
            if not rel.is_zero():
                raise InconsistentRelations(
                    f"order {k} {fam}: prolonged relation leaves {B.fmt(rel)[:200]}"
                )
        return gens

    # ------------------------------------------------------------ calculus

    def partials(self, s, name: str, idx: tuple, side: str = "L"):
        """Map jet multi-index -> partial derivative of scalar s by name_idx(jet)."""
        out = {}
        for lid in self.B.letters(s):
            let = L.get(lid)
            if let.name == name and let.idx == idx:
                d = self.B.deriv(s, lid, side)
                if not d.is_zero():
                    out[let.jet] = d
        return out

    def euler(self, s, name: str, idx: tuple, side: str = "L"):
        """Variational derivative of the density s by the component name_idx.

        E = sum_alpha (-1)^|alpha| sym(D_alpha) d s / d X_(alpha), evaluated
        Horner style by peeling off the outermost derivative.
        """
        fam = self.partials(s, name, idx, side)
        if not fam:
            lie = FIELDS[name][0]
            return self.B.zero_l() if lie else self.B.zero_s()
        return self._horner(fam)

    def _horner(self, fam: dict):
        res = fam.get(())
        sub: dict = {}
        for alpha, m in fam.items():
            if not alpha:
                continue
            k = len(alpha)
            for mu in set(alpha):
                w = Q(alpha.count(mu), k)
                b = remove_one(alpha, alpha.index(mu))
                d = sub.setdefault(mu, {})
                t = m.scale(w)
                d[b] = d[b] + t if b in d else t
        for mu in sorted(sub):
            inner = self._horner(sub[mu])
            term = -self.D(mu, inner)
            res = term if res is None else res + term
        return res
