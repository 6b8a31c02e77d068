"""Suite registry, reports and the runner."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from ..errors import ConfigError, IncompatibleTheory, NonFinite, UnknownSuite
from .config import make_config


@dataclass(frozen=True)
class Randomization:
    trials: int = 0
    max_degree: int = 0
    max_deriv: int = 0


@dataclass(frozen=True)
class SuiteSpec:
    """A named identity check.

    ``claim`` states the checked identity in our own words; where it comes
    from is recorded in the decisions ledger, not here.
    """

    id: str
    claim: str
    checker: object
    theories: frozenset = frozenset({"ym", "scalar"})
    symbolic: bool = True
    randomization: Randomization = Randomization()


@dataclass
class Outcome:
    ok: bool
    residual: object = "0"
    details: dict = field(default_factory=dict)


@dataclass
class Report:
    suite: str
    status: str
    residual: object
    seed: int
    millis: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        d = {"suite": self.suite, "status": self.status, "residual": self.residual, "seed": self.seed}
        if timing:
            d["millis"] = self.millis
        if self.details:
            d["details"] = self.details
        return d


REGISTRY: dict = {}
THEORIES = ("ym", "scalar")


def register(spec: SuiteSpec) -> SuiteSpec:
    if spec.id in REGISTRY:
        raise ValueError(f"duplicate suite id {spec.id}")
    REGISTRY[spec.id] = spec
    return spec


def suite(id, claim, theories=("ym", "scalar"), symbolic=True, randomization=Randomization()):
    def deco(fn):
        register(SuiteSpec(id, claim, fn, frozenset(theories), symbolic, randomization))
        return fn

    return deco


class RunContext:
    """What a checker sees: the validated config plus a per-suite RNG."""

    def __init__(self, cfg: dict, suite_id: str):
        self.cfg = cfg
        self.seed = cfg["seed"]
        self.mutation = cfg["mutation"]
        self.suite_id = suite_id
        alg = cfg["algebra"]
        self.algebras = ("su2", "abstract") if alg == "both" else (alg,)

    def rng(self, tag="") -> random.Random:
        return random.Random(f"{self.seed}:{self.suite_id}:{tag}")

    def trials(self, key: str) -> int:
        return self.cfg["trials"][key]


def suite_ids() -> list:
    _load()
    return sorted(REGISTRY)


def get_spec(suite_id: str) -> SuiteSpec:
    _load()
    if suite_id not in REGISTRY:
        raise UnknownSuite(f"no suite named {suite_id!r}; known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[suite_id]


def _load():
    # suites register themselves on import
    from . import lattice_suites, star_suites, symbolic  # noqa: F401


def run_suite(suite_id: str, theory: str | None = None, config: dict | None = None) -> Report:
    """Run one suite; ``config`` holds overrides of the defaults."""
    spec = get_spec(suite_id)
    cfg = make_config(config)
    return _run(spec, theory or cfg["theory"], cfg)


def _run(spec: SuiteSpec, theory: str, cfg: dict) -> Report:
    suite_id = spec.id
    if theory not in THEORIES:
        raise ConfigError(f"unknown theory {theory!r}; expected one of {THEORIES}")
    if theory not in spec.theories:
        raise IncompatibleTheory(f"suite {suite_id} does not apply to theory {theory!r}")
    ctx = RunContext(cfg, suite_id)
    t0 = time.perf_counter()
    try:
        out = spec.checker(ctx)
    except NonFinite as exc:
        # a blow-up is a verdict on the scheme, not a usage error
        out = Outcome(False, f"NonFinite: {exc}")
    millis = int(round(1000 * (time.perf_counter() - t0)))
    status = "pass" if out.ok else "fail"
    residual = out.residual
    if not out.ok and residual in ("0", 0, 0.0, None):
        residual = "nonzero (see details)"
    return Report(suite_id, status, residual, cfg["seed"], millis, out.details)


def run_all(theory: str | None = None, config: dict | None = None, suites=None) -> list:
    """Run every registered (or every listed) suite; inapplicable ones are skipped."""
    cfg = make_config(config)
    theory = theory or cfg["theory"]
    if theory not in THEORIES:
        raise ConfigError(f"unknown theory {theory!r}; expected one of {THEORIES}")
    ids = suite_ids() if suites is None else sorted(set(suites))
    reports = []
    for sid in ids:
        spec = get_spec(sid)
        if theory not in spec.theories:
            reports.append(Report(sid, "skipped", "0", cfg["seed"], 0, {"reason": f"not a {theory} suite"}))
            continue
        reports.append(_run(spec, theory, cfg))
    return reports


def all_pass(reports) -> bool:
    return all(r.status != "fail" for r in reports)
