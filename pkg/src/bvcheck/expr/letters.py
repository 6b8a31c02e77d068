"""Interned jet coordinates.

A letter is one coordinate of the jet space: a field name, its spacetime
component indices and a sorted multi-index of symmetrized covariant
derivatives.  Lie letters are algebra valued, scalar letters are plain
commuting (or anticommuting) numbers.  Letters are interned into small
integers so that polynomials can use plain int tuples as monomials.
"""
from __future__ import annotations

from dataclasses import dataclass

# spacetime dimension and signature (-,+,+,+)
DIM = 4
ETA = (-1, 1, 1, 1)


@dataclass(frozen=True)
class Letter:
    name: str
    idx: tuple = ()
    jet: tuple = ()
    lie: bool = True
    parity: int = 0

    @property
    def order(self) -> int:
        return len(self.jet)

    def with_jet(self, jet) -> "Letter":
        return Letter(self.name, self.idx, tuple(sorted(jet)), self.lie, self.parity)

    def label(self) -> str:
        s = self.name
        if self.idx:
            s += "_" + "".join(str(i) for i in self.idx)
        if self.jet:
            s += "(" + "".join(str(i) for i in self.jet) + ")"
        return s

    def sort_key(self):
        return (self.name, self.idx, len(self.jet), self.jet)


_ids: dict[Letter, int] = {}
_letters: list[Letter] = []
# parity per interned id, kept as a list for fast lookup in inner loops
PAR: list[int] = []


def intern(let: Letter) -> int:
    lid = _ids.get(let)
    if lid is None:
        lid = len(_letters)
        _ids[let] = lid
        _letters.append(let)
        PAR.append(let.parity)
    return lid


def get(lid: int) -> Letter:
    return _letters[lid]


def lid_of(name: str, idx=(), jet=(), lie=True, parity=0) -> int:
    return intern(Letter(name, tuple(idx), tuple(sorted(jet)), lie, parity))


def shift_jet(lid: int, mu: int) -> int:
    """Letter with one more symmetrized derivative index."""
    let = _letters[lid]
    return intern(let.with_jet(let.jet + (mu,)))


def sort_key(lid: int):
    return _letters[lid].sort_key()
