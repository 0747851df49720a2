import json
import subprocess
import sys

import pytest

from resolv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_check_m0(capsys):
    code, r = run(capsys, "check", "m0")
    assert code == 0
    assert r["result"]["status"] == "Proved"
    assert r["version"]


def test_residual_exam1(capsys):
    code, r = run(capsys, "residual", "exam1")
    assert code == 0
    assert r["result"]["residually_solvable"] == "Proved"
    assert r["result"]["residually_nilpotent"] == "Refuted"


def test_complete_R_F_2(capsys):
    code, r = run(capsys, "complete", "R_F_2", "-n", "8", "--seed", "7")
    assert code == 0 and r["result"]["complete"] is True


def test_incomplete_exits_one_with_witness(capsys):
    code, r = run(capsys, "complete", "R1_m0_1", "-n", "6")
    assert code == 1
    assert r["result"]["outer_coset_reps"]


def test_refuted_check_exits_one(tmp_path, capsys):
    f = tmp_path / "bad.dsl"
    f.write_text("algebra bad kind leibniz\nfamily e start 1\nrule [e(i), e(1)] = e(i+1) for i >= 2\nrule [e(1), e(i)] = e(i+1) for i >= 2\n")
    code, r = run(capsys, "check", str(f))
    assert code == 1
    assert r["result"]["status"] == "Refuted" and r["result"]["counterexample"]


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "nope"],
        ["truncate", "m0"],
        ["truncate", "R1_m0_1", "-n", "5", "--param", "beta3"],
        ["truncate", "R1_m0_1", "-n", "5", "--param", "gamma=1"],
        ["h2", "F", "-n", "5", "--flavor", "lie"],
        ["transform", "no_such_scenario"],
        ["accept", "99"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_syntax_error_exit_two(tmp_path, capsys):
    f = tmp_path / "bad.dsl"
    f.write_text("algebra a kind lie\nfamily e start 1\nrule [e(i) e(1)] = e(i+1)\n")
    code, r = run(capsys, "check", str(f))
    assert code == 2 and r["error"] == "DSLSyntaxError"


def test_truncate_params_and_determinism(capsys):
    argv = ["truncate", "R1_m0_1", "-n", "5", "--param", "beta3=1/2", "--seed", "4"]
    main(argv)
    a = capsys.readouterr().out
    main(argv)
    b = capsys.readouterr().out
    assert a == b
    r = json.loads(a)
    assert r["bindings"]["beta3"] == "1/2"
    assert r["result"]["basis"][-1] == "x"


def test_series_and_depth(capsys):
    code, r = run(capsys, "series", "m0", "--depth", "6")
    assert r["result"]["codims"] == [0, 2, 3, 4, 5, 6]
    code, r = run(capsys, "series", "m0", "--which", "derived")
    assert r["result"]["members"][-1] == "0"


def test_der_h1_h2(capsys):
    code, r = run(capsys, "der", "m0", "-n", "4")
    assert r["result"]["der_dim"] == 7
    code, r = run(capsys, "h1", "R3_m0_1", "-n", "8")
    assert r["result"]["h1_dim"] >= 1
    code, r = run(capsys, "h2", "Oprime", "-n", "5", "--flavor", "leibniz")
    assert code == 0 and r["result"]["h2_dim"] == 0


def test_transform_shipped(capsys):
    code, r = run(capsys, "transform", "m0_case1_2")
    assert code == 0 and r["result"]["ok"]


def test_catalog_and_scenarios(capsys):
    code, r = run(capsys, "catalog", "list")
    assert len(r["result"]["entries"]) == 13
    code, r = run(capsys, "scenarios")
    assert {c["criterion"] for c in r["result"]["criteria"]} == set(range(1, 12))


def test_accept_single(capsys):
    code, r = run(capsys, "accept", "3")
    assert code == 0 and r["result"]["passed"] == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "resolv", "check", "m0", "--pretty"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["result"]["status"] == "Proved"
    assert out.stdout.startswith("{\n")
