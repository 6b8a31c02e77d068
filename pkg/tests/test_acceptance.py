"""Acceptance run: every primary criterion checked at its stated tolerance.

One full ``verify --all`` on defaults feeds most checks; the negative controls
rerun the registry with one mutation each.  A PASS/FAIL line per criterion is
printed in the terminal summary.
"""
from __future__ import annotations

import json

import pytest

from bvcheck.cli import main
from bvcheck.models import MUTATIONS

from conftest import record

# reduced trial counts for the mutation sweep (nine full runs); kernels >= 8 so
# that at least one compatible chain kernel is drawn for the transpose control
REDUCED = {"trials": {"dhat": 2, "jacobi": 3, "star_assoc": 4, "star_kernels": 8}}


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acc") / "report.json"
    rc = main(["verify", "--all", "--out", str(out)])
    reports = {r["suite"]: r for r in json.loads(out.read_text())}
    return rc, reports


def _exact(rep):
    return rep["status"] == "pass" and rep["residual"] == "0"


def test_master_equation(full_run):
    rep = full_run[1]["master_equation"]
    ok = _exact(rep) and rep["millis"] < 120_000
    record("master_equation", ok, f"residual {rep['residual']}, {rep['millis']} ms")
    assert ok


def test_shift_proposition_and_corollary(full_run, tmp_path):
    reps = full_run[1]
    exact = _exact(reps["ym_shift_prop"]) and _exact(reps["cD_S_corollary"])
    out = tmp_path / "m.json"
    rc = main(["verify", "--suite", "ym_shift_prop", "--suite", "cD_S_corollary",
               "--mutation", "psi_sign", "--out", str(out)])
    mutated = json.loads(out.read_text())
    caught = rc == 1 and all(r["status"] == "fail" and r["residual"] != "0" for r in mutated)
    record("ym_shift_prop + cD_S_corollary", exact and caught, "exact 0; psi_sign mutation fails both")
    assert exact and caught


def test_dhat_theorem(full_run):
    reps = full_run[1]
    ok = True
    for sid in ("dhat_leibniz", "dhat_commutes_s", "dhat_flat"):
        rep = reps[sid]
        d = rep["details"] or {}
        ok &= _exact(rep)
        ok &= "backend_verdicts" not in d
        ok &= all(d.get(alg, {}).get("trials", 0) >= 20 for alg in ("su2", "abstract"))
    record("dhat theorem", ok, "3 identities, 20 functionals per backend, backends agree")
    assert ok


@pytest.mark.xfail(strict=True, reason="derived off-shell sign is opposite to the printed formula; see ledger")
def test_s0_square_offshell(full_run):
    rep = full_run[1]["s0_square_offshell"]
    d = rep["details"]
    vanishes = rep["status"] == "pass" and d["onshell_expr"] == "0"
    ok = vanishes and d["printed_sign_matches"]
    record("s0_square_offshell", ok,
           "vanishes on shell; off-shell form is [grad^nu Fbar_{nu mu}, C], opposite sign to the printed one")
    assert ok


def test_jacobi_and_symmetry(full_run):
    rep = full_run[1]["jacobi"]
    ok = _exact(rep) and all(rep["details"][alg]["trials"] >= 50 for alg in ("su2", "abstract"))
    record("jacobi + graded symmetry", ok, "50 random triples per backend")
    assert ok


def test_current_divergence_and_KP_adjoint(full_run):
    reps = full_run[1]
    ok = _exact(reps["current_divergence"]) and _exact(reps["KP_adjoint"])
    record("current_divergence + KP_adjoint", ok)
    assert ok


def test_star_suite(full_run):
    reps = full_run[1]
    comm, assoc, der = reps["star_commutator"], reps["star_assoc"], reps["star_derivation"]
    ok = _exact(comm) and comm["details"]["deg_checks"] > 0
    ok &= _exact(assoc) and assoc["details"]["trials"] >= 100
    ok &= _exact(der) and der["details"]["kernels"] >= 20 and der["details"]["incompatible"] >= 5
    record("star suite", ok, f"{assoc['details']['trials']} assoc triples, {der['details']['kernels']} kernels "
                             f"({der['details']['incompatible']} incompatible)")
    assert ok


def test_lattice_suite(full_run):
    reps = full_run[1]
    g, rop, rv = reps["lattice_green"], reps["lattice_rop"], reps["lattice_retvar"]
    gd, rd, vd = g["details"], rop["details"], rv["details"]
    millis = g["millis"] + rop["millis"] + rv["millis"]
    ok = all(r["status"] == "pass" for r in (g, rop, rv))
    ok &= gd["support_violation"] == 0.0
    ok &= abs(gd["order"] - 2.0) <= 0.2
    ok &= rd["solution_order"] >= 1.8 and rd["composition_order"] >= 1.8
    ok &= vd["background_order"] >= 1.8
    ok &= millis < 60_000
    record("lattice suite", ok, f"green order {gd['order']:.3f}, rop {rd['solution_order']:.3f}/"
                                f"{rd['composition_order']:.3f}, retvar {vd['background_order']:.3f}, {millis} ms")
    assert ok


def test_end_to_end_defaults(full_run):
    rc, reps = full_run
    ok = rc == 0 and all(r["status"] == "pass" for r in reps.values())
    record("end-to-end: verify --all on defaults", ok, f"exit {rc}")
    assert ok


@pytest.mark.parametrize("mutation", sorted(MUTATIONS))
def test_end_to_end_mutation(mutation, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(REDUCED))
    out = tmp_path / "m.json"
    rc = main(["verify", "--all", "--config", str(cfg), "--mutation", mutation, "--out", str(out)])
    text = capsys.readouterr().out
    failed = [r["suite"] for r in json.loads(out.read_text()) if r["status"] == "fail"]
    ok = rc == 1 and bool(failed) and f"failing suites: {', '.join(failed)}" in text
    record(f"end-to-end: mutation {mutation}", ok, "fails " + ", ".join(failed))
    assert ok
