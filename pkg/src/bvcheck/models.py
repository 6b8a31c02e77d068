"""The two model theories: scalar phi^4 and gauge-fixed Yang-Mills.

A :class:`TheoryModel` is a recipe; its action pieces are built lazily in
each :class:`~bvcheck.funcalc.Context` (backend plus region) and cached.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from .expr.num import Q

from .errors import InvalidAlgebra
from .expr import letters as L
from .expr.jet import FIELDS
from .expr.letters import DIM, ETA
from .funcalc import (
    Context,
    LocalFunctional,
    apply_derivation,
    field_degree_part,
    get_context,
    jet_image,
    s_apply,
)

ALGEBRAS = ("abstract", "su2")

# mass dimensions and ghost numbers of the generators (antifields carry
# the density weight: d(Phi*) = 4 - d(Phi))
GRADINGS = {name: {"ghost": spec[3], "mass_dim": spec[4], "parity": spec[2]} for name, spec in FIELDS.items()}

# known deliberate corruptions used as negative controls
MUTATIONS = {
    "psi_sign": "gauge-fixing fermion handed to the identities has the wrong sign",
    "table1_sign": "free BRST table uses s0 Cbar = -B",
    "quartic_coeff": "quartic YM self-coupling scaled by 2",
    "dhat_no_correction": "connection D-hat drops its (-, D Psi) correction",
    "star_no_factorial": "star product exponential drops the 1/k! factors",
    "kernel_transpose": "derivation check pairs K with the transposed kernel",
    "lattice_stencil": "lattice Laplacian uses the wrong diagonal weight",
    "lattice_source_scale": "Green function source is not divided by dx*dt",
    "rop_sign": "retarded wave operator adds the correction with the wrong sign",
}


@dataclass
class LieAlgebraSpec:
    mode: str = "su2"

    def __post_init__(self):
        if self.mode not in ALGEBRAS:
            raise InvalidAlgebra(f"unknown algebra {self.mode!r}; use one of {ALGEBRAS}")

    def structure_constants(self):
        """f^{IJK} for su(2) (Levi-Civita), as a dict over nonzero entries."""
        if self.mode != "su2":
            raise InvalidAlgebra("abstract algebra has no explicit structure constants")
        out = {}
        for (i, j, k), s in (((1, 2, 3), 1), ((2, 3, 1), 1), ((3, 1, 2), 1),
                             ((2, 1, 3), -1), ((1, 3, 2), -1), ((3, 2, 1), -1)):
            out[(i, j, k)] = s
        return out


@dataclass
class TheoryModel:
    name: str
    kind: str
    algebra: LieAlgebraSpec | None = None
    mutation: str | None = None
    coupling_zero: bool = False
    _pieces: dict = field(default_factory=dict, repr=False)

    def context(self, region: str = "R", onshell_vars=()) -> Context:
        alg = self.algebra.mode if self.algebra else "su2"
        return get_context(self.kind, alg, region, tuple(onshell_vars))

    def piece(self, ctx: Context, which: str) -> LocalFunctional:
        key = (ctx.key, which)
        hit = self._pieces.get(key)
        if hit is None:
            built = _build_ym(self, ctx) if self.kind == "ym" else _build_scalar(self, ctx)
            for k, v in built.items():
                self._pieces[(ctx.key, k)] = v
            hit = self._pieces[key]
        return hit

    def field_table(self):
        names = ("A", "B", "C", "Cb", "As", "Bs", "Cs", "Cbs") if self.kind == "ym" else ("phi",)
        return {n: GRADINGS[n] for n in names}


def build_scalar_theory(mass="m", coupling="lambda0", mutation=None) -> TheoryModel:
    """phi^4 theory split around a background phibar.

    ``coupling`` may be 0 to request the free theory.
    """
    zero = coupling in (0, "0")
    return TheoryModel("scalar", "scalar", None, mutation, coupling_zero=zero)


def build_ym_theory(algebra="su2", mutation=None) -> TheoryModel:
    spec = algebra if isinstance(algebra, LieAlgebraSpec) else LieAlgebraSpec(algebra)
    if mutation is not None and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    return TheoryModel("ym", "ym", spec, mutation)


# ------------------------------------------------------------------ builders


def _build_scalar(th: TheoryModel, ctx: Context) -> dict:
    J, B = ctx.J, ctx.B
    phi = J.letter("phi")
    phib = J.letter("phib")
    m = J.letter("m")
    lam = B.zero_s() if th.coupling_zero else ctx.lam()
    kin = B.zero_s()
    for mu in range(DIM):
        d = J.D(mu, phi)
        kin = kin + (d * d).scale(ETA[mu])
    half = Q(1, 2)
    mass = m * m + (lam * phib * phib).scale(half)
    S0 = -(kin + mass * phi * phi).scale(half)
    Sint = -((lam * phib * phi * phi * phi).scale(Q(1, 6))
             + (lam * phi * phi * phi * phi).scale(Q(1, 24)))
    f = lambda d: LocalFunctional(d, ctx, ctx.region)
    return {"S0": f(S0), "S_int": f(Sint), "S": f(S0 + Sint), "Psi": f(B.zero_s()),
            "Psi_true": f(B.zero_s())}


def ym_s_images(ctx: Context):
    """Values of the full BRST differential on the fields (cutoff included)."""
    J = ctx.J
    lam = ctx.lam()
    C = J.letter("C")

    def base(name, idx):
        if name == "A":
            mu = idx[0]
            return J.D(mu, C) + (J.letter("A", (mu,)).bracket(C)).rmul_scalar(lam)
        if name == "C":
            return C.bracket(C).scale(Q(-1, 2)).rmul_scalar(lam)
        if name == "Cb":
            return J.letter("B")
        return None

    return base


def _build_ym(th: TheoryModel, ctx: Context) -> dict:
    J, B = ctx.J, ctx.B
    lam = ctx.lam()
    A = [J.letter("A", (m,)) for m in range(DIM)]
    As = [J.letter("As", (m,)) for m in range(DIM)]
    C, Cb, Bf = J.letter("C"), J.letter("Cb"), J.letter("B")
    quartic = Q(2) if th.mutation == "quartic_coeff" else Q(1)
    LYM = B.zero_s()
    for m in range(DIM):
        for n in range(DIM):
            if m == n:
                continue
            lin = J.D(m, A[n]) - J.D(n, A[m])
            br = A[m].bracket(A[n]).rmul_scalar(lam)
            w = Q(-1, 4) * ETA[m] * ETA[n]
            LYM = LYM + lin.pair(lin).scale(w) + (lin.pair(br) + br.pair(lin)).scale(w)
            LYM = LYM + br.pair(br).scale(w * quartic)
            LYM = LYM + J.fbar(m, n).pair(A[m].bracket(A[n])).scale(2 * w)
    base = ym_s_images(ctx)
    sA = [base("A", (m,)) for m in range(DIM)]
    sC = base("C", ())
    Ssc = B.zero_s()
    for m in range(DIM):
        Ssc = Ssc - sA[m].pair(As[m])
    Ssc = Ssc - sC.pair(J.letter("Cs")) - Bf.pair(J.letter("Cbs"))
    divA = B.zero_l()
    for m in range(DIM):
        divA = divA + J.D(m, A[m]).scale(ETA[m])
    f = lambda d: LocalFunctional(d, ctx, ctx.region)
    Psi = f(Cb.pair(divA + Bf.scale(Q(1, 2))))
    sPsi = apply_derivation(Psi, jet_image(ctx, base, "s_local"), 1, "s_local")
    S = LYM + Ssc + sPsi.density
    out = {
        "S_YM": f(LYM),
        "S_sc": f(Ssc),
        "S": f(S),
        "S0": f(field_degree_part(ctx, S, 2)),
        "Psi_true": Psi,
        "Psi": -Psi if th.mutation == "psi_sign" else Psi,
        "s_Psi": sPsi,
    }
    out["S_int"] = out["S"] - out["S0"]
    return out


def s_local(F: LocalFunctional, ctx: Context | None = None) -> LocalFunctional:
    """BRST differential on fields only, as a derivation on jet coordinates."""
    ctx = ctx or F.ctx
    return apply_derivation(F, jet_image(ctx, ym_s_images(ctx), "s_local"), 1, "s_local")


def cohomology_generator_closedness(theory: TheoryModel, candidate: LocalFunctional) -> bool:
    """True iff s(candidate) vanishes on R (pointwise or modulo total derivatives)."""
    from .funcalc import is_null

    return is_null(s_apply(candidate, theory))


def grading_of_letter(lid: int) -> dict:
    let = L.get(lid)
    return GRADINGS.get(let.name, {"ghost": 0, "mass_dim": 0, "parity": 0})
