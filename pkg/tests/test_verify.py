from __future__ import annotations

import json

import pytest

from bvcheck.errors import CFLViolation, ConfigError, IncompatibleTheory, UnknownSuite
from bvcheck.verify import DEFAULTS, all_pass, get_spec, load_config, make_config, run_all, run_suite, suite_ids

REQUIRED = {
    "master_equation", "scalar_split", "ym_shift_prop", "cD_S_corollary", "dhat_leibniz", "dhat_commutes_s",
    "dhat_flat", "jacobi", "s0_table_crosscheck", "s0_square_offshell", "current_divergence", "KP_adjoint",
    "cohomology_closedness", "star_commutator", "star_assoc", "star_derivation", "lattice_green",
    "lattice_rop", "lattice_retvar",
}
GAUGE_ONLY = {s for s in REQUIRED if not (s.startswith(("star", "lattice")) or s == "scalar_split")}
FAST = ["scalar_split", "ym_shift_prop", "cD_S_corollary", "current_divergence", "KP_adjoint",
        "star_commutator", "star_ideal"]
LIGHT = {"trials": {"dhat": 2, "jacobi": 3, "star_assoc": 4, "star_kernels": 8}}


# ---------------------------------------------------------------- config


def test_defaults_validate():
    cfg = make_config()
    assert cfg["theory"] == "ym" and cfg["lattice"]["nx"] == 128 and cfg["lattice"]["nt"] == 256
    assert make_config({"seed": 5})["seed"] == 5
    assert DEFAULTS["seed"] == 0


@pytest.mark.parametrize("bad", [
    {"colour": 1},
    {"lattice": {"nx": 128, "bogus": 1}},
    {"theory": "qed"},
    {"algebra": "e8"},
    {"seed": "zero"},
    {"max_deriv": 3},
    {"trials": {"dhat": 0}},
    {"lattice": {"nx": -4}},
    {"mutation": "nope"},
])
def test_bad_config_rejected(bad):
    with pytest.raises(ConfigError):
        make_config(bad)


def test_cfl_violation_in_config():
    with pytest.raises(CFLViolation):
        make_config({"lattice": {"dt": 0.095}})


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 3, "lattice": {"refine": 3}}))
    cfg = load_config(p)
    assert make_config(cfg)["lattice"]["refine"] == 3
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


# ---------------------------------------------------------------- registry


def test_required_suites_registered():
    assert REQUIRED <= set(suite_ids())
    for sid in suite_ids():
        spec = get_spec(sid)
        assert spec.claim and spec.theories <= {"ym", "scalar"}


def test_unknown_and_incompatible():
    with pytest.raises(UnknownSuite):
        run_suite("nosuch")
    with pytest.raises(IncompatibleTheory):
        run_suite("master_equation", "scalar")
    with pytest.raises(ConfigError):
        run_suite("scalar_split", "qed")


def test_report_schema():
    r = run_suite("ym_shift_prop")
    d = r.to_dict()
    assert {"suite", "status", "residual", "seed", "millis"} <= set(d)
    assert d["status"] == "pass" and d["residual"] == "0"
    assert "millis" not in r.to_dict(timing=False)


def test_scalar_theory_skips_gauge_suites():
    reports = run_all("scalar", LIGHT, sorted(GAUGE_ONLY) + ["scalar_split", "star_commutator"])
    status = {r.suite: r.status for r in reports}
    assert all(status[s] == "skipped" for s in GAUGE_ONLY)
    assert status["scalar_split"] == "pass" and status["star_commutator"] == "pass"
    assert all_pass(reports)


def test_reports_are_deterministic():
    a = [r.to_dict(timing=False) for r in run_all("ym", {"seed": 4, **LIGHT}, FAST + ["jacobi"])]
    b = [r.to_dict(timing=False) for r in run_all("ym", {"seed": 4, **LIGHT}, FAST + ["jacobi"])]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_reports_are_sorted_by_suite_id():
    reports = run_all("ym", LIGHT, ["star_ideal", "scalar_split", "KP_adjoint"])
    assert [r.suite for r in reports] == sorted(r.suite for r in reports)


def test_backends_can_be_selected():
    for alg in ("su2", "abstract"):
        assert run_suite("cD_S_corollary", config={"algebra": alg}).status == "pass"


# ---------------------------------------------------------------- negative controls


@pytest.mark.parametrize("mutation, suites", [
    ("psi_sign", ["ym_shift_prop", "cD_S_corollary"]),
    ("table1_sign", ["s0_table_crosscheck"]),
    ("kernel_transpose", ["star_derivation"]),
    ("rop_sign", ["lattice_rop"]),
    ("lattice_stencil", ["lattice_green"]),
])
def test_mutation_is_detected(mutation, suites):
    reports = run_all("ym", {"mutation": mutation, **LIGHT}, suites)
    for r in reports:
        assert r.status == "fail", r.suite
        assert r.residual not in ("0", 0, None)
    assert not all_pass(reports)


def test_failure_is_reproducible():
    cfg = {"mutation": "psi_sign", "seed": 2}
    a = run_suite("ym_shift_prop", config=cfg).to_dict(timing=False)
    b = run_suite("ym_shift_prop", config=cfg).to_dict(timing=False)
    assert a == b and a["status"] == "fail"
