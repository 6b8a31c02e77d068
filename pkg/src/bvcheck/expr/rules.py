"""Region lattice and the region-dependent rewrite rules.

Regions are nested R < U < V < M.  The cutoff lambda equals 1 on a
neighbourhood of R and vanishes outside U; the background is on shell on
U.  The extra tag ``out`` stands for points outside U (lambda = 0 there).

Rules:

* ``cutoff``   lambda -> 1 (derivatives of lambda -> 0) on R; lambda -> 0 on ``out``
* ``onshell``  D^mu Fbar_{mu nu} -> 0 on U (and so on R)
* ``commute``  D_a D_b X -> D_b D_a X + [Fbar_{ab}, X] when b sorts before a (any region)
"""
from __future__ import annotations

from ..errors import RuleNotValidOnRegion
from .graded import Factor, GradedExpr, Term, _fresh, derivative, gen, normalize, raw_mul, term_expr
from .num import Q

REGIONS = ("R", "U", "V", "M")
TAGS = REGIONS + ("out",)
_RANK = {r: i for i, r in enumerate(REGIONS)}

RULE_REGIONS = {
    "cutoff": frozenset({"R", "out"}),
    "onshell": frozenset({"R", "U"}),
    "commute": frozenset(TAGS),
}
ALL_RULES = ("cutoff", "onshell", "commute")


def included(a: str, b: str) -> bool:
    """a is contained in b."""
    if a == "out" or b == "out":
        return a == b or b == "M"
    return _RANK[a] <= _RANK[b]


def join(a: str, b: str) -> str:
    """Smallest region containing both (support of sums and products)."""
    if a == b:
        return a
    if "out" in (a, b):
        return "M"
    return a if _RANK[a] >= _RANK[b] else b


def valid_rules(region: str) -> tuple:
    if region not in TAGS:
        raise RuleNotValidOnRegion(f"unknown region {region!r}")
    return tuple(r for r in ALL_RULES if region in RULE_REGIONS[r])


def _cutoff(t: Term, region: str):
    lam = [f for f in t.factors if f.kind == "gen" and f.name == "lam"]
    if not lam:
        return [t]
    if region == "out" or any(f.derivs for f in lam):
        return []
    return [t.with_(factors=tuple(f for f in t.factors if not (f.kind == "gen" and f.name == "lam")))]


def _onshell(t: Term):
    for f in t.factors:
        if f.kind == "gen" and f.name == "Fbar" and f.derivs:
            inner = f.derivs[-1][0]
            if any(l == inner for l, _ in f.slots):
                return []
    return [t]


def _commute_once(t: Term):
    """Rewrite the first out-of-order derivative pair; None if there is none."""
    for k, f in enumerate(t.factors):
        if f.kind != "gen" or len(f.derivs) < 2:
            continue
        for i in range(len(f.derivs) - 1):
            (a, pa), (b, pb) = f.derivs[i], f.derivs[i + 1]
            if a <= b:
                continue
            swapped = f.derivs[:i] + ((b, pb), (a, pa)) + f.derivs[i + 2:]
            out = [t.with_(factors=t.factors[:k] + (Factor("gen", f.name, f.lie, f.slots, swapped),)
                           + t.factors[k + 1:])]
            if f.lie is not None:
                taken = {(ns, l) for g in t.factors for ns, l, _ in g.occurrences()}
                J = _fresh("l", taken, "J")
                taken.add(("l", J))
                K = _fresh("l", taken, "J")
                inner = Factor("gen", f.name, K, f.slots, f.derivs[i + 2:])
                curv = GradedExpr.factor(gen("Fbar", J, ((a, pa), (b, pb))))
                br = raw_mul(raw_mul(GradedExpr.factor(Factor("f", slots=(f.lie, J, K))), curv),
                             GradedExpr.factor(inner))
                for label, pos in reversed(f.derivs[:i]):
                    br = derivative(label, pos, br, rename=False)
                pre = Term(t.coef, t.params, False, t.factors[:k])
                post = Term(Q(1), (), False, t.factors[k + 1:])
                piece = raw_mul(raw_mul(term_expr(pre), br), term_expr(post))
                out += [s.with_(vol=t.vol) for s in piece.terms]
            return out
    return None


def apply_rules(e: GradedExpr, rules=ALL_RULES, region: str = "R", algebra: str = "abstract") -> GradedExpr:
    """Apply the rules to a fixed point, then normalize."""
    rules = tuple(rules)
    for r in rules:
        if r not in RULE_REGIONS:
            raise RuleNotValidOnRegion(f"unknown rule {r!r}")
        if region not in RULE_REGIONS[r]:
            raise RuleNotValidOnRegion(f"rule {r} is not valid on region {region}")
    work = list(e.terms)
    done = []
    while work:
        t = work.pop()
        if "cutoff" in rules:
            ts = _cutoff(t, region)
            if not ts or ts[0] != t:
                work.extend(ts)
                continue
        if "onshell" in rules and not _onshell(t):
            continue
        if "commute" in rules:
            nt = _commute_once(t)
            if nt is not None:
                work.extend(nt)
                continue
        done.append(t)
    return normalize(GradedExpr(done), algebra)
