"""Exact rational coefficient type shared by the symbolic layers.

gmpy2's mpq is a drop-in for fractions.Fraction and several times faster
on the hot paths (coefficient products and sums); the stdlib type is the
fallback when gmpy2 is missing.
"""
from __future__ import annotations

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

ZERO = Q(0)
ONE = Q(1)
