from __future__ import annotations

import json

import numpy as np
import pytest

from bvcheck.cli import main

LIGHT = {"trials": {"dhat": 2, "jacobi": 3, "star_assoc": 4, "star_kernels": 8}}


def _cfg(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_single_suite_passes(tmp_out, capsys):
    assert main(["verify", "--suite", "master_equation", "--out", str(tmp_out)]) == 0
    assert "PASS    master_equation" in capsys.readouterr().out
    rep = json.loads(tmp_out.read_text())
    assert rep[0]["suite"] == "master_equation" and rep[0]["residual"] == "0"


def test_repeated_suite_flag(tmp_out):
    rc = main(["verify", "--suite", "scalar_split", "--suite", "KP_adjoint", "--seed", "3", "--out", str(tmp_out)])
    rep = json.loads(tmp_out.read_text())
    assert rc == 0 and [r["suite"] for r in rep] == ["KP_adjoint", "scalar_split"]
    assert all(r["seed"] == 3 for r in rep)


def test_unknown_suite_is_a_usage_error(tmp_out, capsys):
    assert main(["verify", "--suite", "nosuch", "--out", str(tmp_out)]) == 2
    assert "UnknownSuite" in capsys.readouterr().err


def test_verify_needs_a_selection(tmp_out):
    assert main(["verify", "--out", str(tmp_out)]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--theory", "qed"])
    assert exc.value.code == 2


def test_scalar_theory_skips_gauge_suites(tmp_path, tmp_out):
    rc = main(["verify", "--all", "--theory", "scalar", "--config", _cfg(tmp_path, LIGHT), "--out", str(tmp_out)])
    rep = {r["suite"]: r["status"] for r in json.loads(tmp_out.read_text())}
    assert rc == 0
    assert rep["master_equation"] == "skipped" and rep["dhat_flat"] == "skipped"
    assert rep["scalar_split"] == "pass" and rep["lattice_green"] == "pass"


def test_bad_config_files(tmp_path, tmp_out, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["verify", "--all", "--config", str(bad), "--out", str(tmp_out)]) == 2
    assert main(["verify", "--all", "--config", str(tmp_path / "none.json")]) == 2
    assert main(["verify", "--all", "--config", _cfg(tmp_path, {"colour": 2})]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_cfl_violation_exits_2(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"lattice": {"dx": 0.1, "dt": 0.095}})
    assert main(["lattice", "--config", cfg]) == 2
    assert "CFLViolation" in capsys.readouterr().err


def test_lattice_refine_and_dump(tmp_path, tmp_out, capsys):
    dump = tmp_path / "fields"
    cfg = _cfg(tmp_path, {"lattice": {"nx": 64, "nt": 128, "dx": 0.2, "dt": 0.1}})
    rc = main(["lattice", "--config", cfg, "--refine", "2", "--dump", str(dump), "--out", str(tmp_out)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "order=" in out and "composition_order=" in out and "variation_order=" in out
    files = sorted(dump.glob("*.txt"))
    assert files
    assert np.loadtxt(files[0]).ndim == 2
    assert {r["suite"] for r in json.loads(tmp_out.read_text())} == {"lattice_green", "lattice_rop", "lattice_retvar"}


def test_mutation_fails_and_names_suite(tmp_out, capsys):
    rc = main(["verify", "--suite", "ym_shift_prop", "--mutation", "psi_sign", "--out", str(tmp_out)])
    out = capsys.readouterr().out
    assert rc == 1
    assert "failing suites: ym_shift_prop" in out
    assert json.loads(tmp_out.read_text())[0]["status"] == "fail"


def test_unknown_mutation_exits_2(tmp_out):
    assert main(["verify", "--suite", "jacobi", "--mutation", "nope", "--out", str(tmp_out)]) == 2


# ---------------------------------------------------------------- expr


def test_odd_square_prints_zero(capsys):
    assert main(["expr", "(* (C I) (C I))"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "0"


def test_s0_of_gauge_field(capsys):
    assert main(["expr", "(s0 (A I _mu))"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "(D _mu (C I))"
    assert lines[1].startswith("grading:") and "ghost=1" in lines[1]


def test_expr_from_stdin(monkeypatch, capsys):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("(* (C I) (C I))\n"))
    assert main(["expr", "-"]) == 0
    assert capsys.readouterr().out.startswith("0")


@pytest.mark.parametrize("text", ["(* (C I) (C I)", "(A I _mu _nu", ")"])
def test_malformed_expression_exits_2(text, capsys):
    assert main(["expr", text]) == 2
    assert "ParseError" in capsys.readouterr().err


def test_expr_round_trip_is_stable(capsys):
    main(["expr", "(* (f I J K) (A I _mu) (A J _nu) (C K))"])
    first = capsys.readouterr().out.splitlines()[0]
    main(["expr", first])
    assert capsys.readouterr().out.splitlines()[0] == first
