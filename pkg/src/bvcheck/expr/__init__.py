"""Graded symbolic expressions: canonical form, grading, rules and equality."""
from __future__ import annotations

from .density import equal_by_euler, equal_density, evaluate, oracle_equal
from .graded import Factor, GradedExpr, Grading, Term, grade_of, normalize, s0
from .rules import REGIONS, apply_rules
from .sexpr import parse, to_text

__all__ = [
    "Factor", "GradedExpr", "Grading", "Term", "REGIONS", "apply_rules", "equal_by_euler",
    "equal_density", "evaluate", "grade_of", "normalize", "oracle_equal", "parse", "s0", "to_text",
]
