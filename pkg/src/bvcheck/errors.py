from __future__ import annotations


class BVError(Exception):
    """Base class for every error raised by the package."""

    code = "BVError"


def _make(name: str, doc: str) -> type:
    return type(name, (BVError,), {"__doc__": doc, "code": name})


ParseError = _make("ParseError", "Text could not be parsed as an expression.")
MalformedIndex = _make("MalformedIndex", "Free indices disagree or an index is used more than twice.")
MixedGrade = _make("MixedGrade", "Terms of different ghost number or parity were combined.")
OrderExceeded = _make("OrderExceeded", "Derivative order above the requested bound.")
BasisOverflow = _make("BasisOverflow", "Monomial basis larger than the configured cap.")
RuleNotValidOnRegion = _make("RuleNotValidOnRegion", "A rewrite rule was requested outside its region.")
UnknownGenerator = _make("UnknownGenerator", "Generator is not part of the theory.")
PsiContainsAntifields = _make("PsiContainsAntifields", "Gauge-fixing fermion must be antifield free.")
TargetMismatch = _make("TargetMismatch", "Variation target does not belong to the theory.")
FieldDependentVariationUnsupported = _make(
    "FieldDependentVariationUnsupported", "Only constant variation symbols are supported."
)
InvalidAlgebra = _make("InvalidAlgebra", "Unknown or inconsistent Lie algebra specification.")
SpaceMismatch = _make("SpaceMismatch", "Polynomials live on different finite field spaces.")
GradingMismatch = _make("GradingMismatch", "Linear map does not raise ghost number by one.")
CFLViolation = _make("CFLViolation", "dt/dx exceeds the CFL bound.")
NonFinite = _make("NonFinite", "Evolution produced non-finite values.")
SupportMismatch = _make("SupportMismatch", "Backgrounds differ outside a compact region.")
StepTooLarge = _make("StepTooLarge", "Finite-difference step gives a non-convergent quotient.")
UnknownSuite = _make("UnknownSuite", "No suite registered under this id.")
IncompatibleTheory = _make("IncompatibleTheory", "Suite does not apply to this theory.")
ConfigError = _make("ConfigError", "Configuration is invalid.")
InconsistentRelations = _make(
    "InconsistentRelations", "Prolonged relations produced an unexpected integrability condition."
)
