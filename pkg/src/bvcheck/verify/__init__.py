"""Named identity suites and the runner."""
from __future__ import annotations

from .config import DEFAULTS, load_config, make_config
from .registry import (
    REGISTRY,
    Outcome,
    Report,
    SuiteSpec,
    all_pass,
    get_spec,
    run_all,
    run_suite,
    suite_ids,
)

__all__ = [
    "DEFAULTS", "REGISTRY", "Outcome", "Report", "SuiteSpec", "all_pass", "get_spec",
    "load_config", "make_config", "run_all", "run_suite", "suite_ids",
]
