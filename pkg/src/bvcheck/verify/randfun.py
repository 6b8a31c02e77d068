"""Random local functionals described independently of the backend.

A draw is a small tree spec; instantiating it in a context yields the
density.  Both Lie backends therefore see the very same instance.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from ..expr.jet import FIELDS
from ..expr.letters import DIM
from ..funcalc import LocalFunctional

FIELD_NAMES = ("A", "B", "C", "Cb")
ANTI_NAMES = ("As", "Bs", "Cs", "Cbs")
SHAPES = {"xy": 2, "x[yz]": 3, "xy.zw": 4}


@dataclass(frozen=True)
class LetterSpec:
    name: str
    idx: tuple
    derivs: tuple

    def text(self) -> str:
        s = self.name + "".join(f"_{i}" for i in self.idx)
        for d in reversed(self.derivs):
            s = f"D{d}({s})"
        return s


@dataclass(frozen=True)
class FunSpec:
    shape: str
    letters: tuple

    def text(self) -> str:
        t = [x.text() for x in self.letters]
        if self.shape == "xy":
            return f"<{t[0]}, {t[1]}>"
        if self.shape == "x[yz]":
            return f"<{t[0]}, [{t[1]}, {t[2]}]>"
        return f"<{t[0]}, {t[1]}><{t[2]}, {t[3]}>"

    @property
    def parity(self) -> int:
        return sum(FIELDS[x.name][2] for x in self.letters) % 2

    @property
    def deriv_order(self) -> int:
        return sum(len(x.derivs) for x in self.letters)


def draw(rng: random.Random, max_deriv: int = 2, shapes=tuple(SHAPES), names=FIELD_NAMES + ANTI_NAMES,
         max_degree: int = 4) -> FunSpec:
    shapes = [s for s in shapes if SHAPES[s] <= max_degree]
    shape = rng.choice(shapes)
    n = SHAPES[shape]
    ks = [0] * n
    for _ in range(rng.randrange(max_deriv + 1)):
        ks[rng.randrange(n)] += 1
    lets = []
    for k in ks:
        name = rng.choice(names)
        idx = (rng.randrange(DIM),) if FIELDS[name][1] else ()
        lets.append(LetterSpec(name, idx, tuple(rng.randrange(DIM) for _ in range(k))))
    return FunSpec(shape, tuple(lets))


def instantiate(spec: FunSpec, ctx, support: str | None = None) -> LocalFunctional:
    J = ctx.J
    vals = []
    for x in spec.letters:
        v = J.letter(x.name, x.idx)
        for d in reversed(x.derivs):
            v = J.D(d, v)
        vals.append(v)
    if spec.shape == "xy":
        d = vals[0].pair(vals[1])
    elif spec.shape == "x[yz]":
        d = vals[0].pair(vals[1].bracket(vals[2]))
    else:
        d = vals[0].pair(vals[1]) * vals[2].pair(vals[3])
    return LocalFunctional(d, ctx, support or ctx.region)
