import json
import math
from fractions import Fraction

import pytest

from schwingerlab.cli import (
    EnsembleParseError,
    RunReport,
    emit_report,
    main,
    parse_ensemble_text,
    run,
    to_json,
)


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_casimir_ff_output_is_stable(capsys):
    code, first, _ = invoke(capsys, "casimir", "--kind", "ff")
    _, second, _ = invoke(capsys, "casimir", "--kind", "ff")
    assert code == 0
    assert first == second
    assert '"eigenvalues":[0,0,0.75,0.75]' in first
    doc = json.loads(first)
    assert list(doc) == ["command", "params", "results", "checks", "exit_code"]
    assert [lv["j"] for lv in doc["results"]["levels"]] == [0, 0.5]


def test_casimir_scales_with_hbar(capsys):
    _, out, _ = invoke(capsys, "casimir", "--kind", "ff", "--hbar", "2")
    assert json.loads(out)["results"]["eigenvalues"] == [0, 0, 3, 3]


@pytest.mark.parametrize("argv, code", [
    (["verify", "--kind", "bb", "--cutoff", "8"], 0),
    (["verify", "--kind", "ff"], 0),
    (["verify", "--kind", "bf_corrected"], 0),
    (["verify", "--kind", "bf_corrected", "--jz-form", "eq59"], 1),
    (["verify", "--kind", "bf_naive"], 1),
])
def test_verify_exit_codes(capsys, argv, code):
    got, out, _ = invoke(capsys, *argv)
    assert got == code
    doc = json.loads(out)
    assert doc["exit_code"] == code
    assert all(c["passed"] for c in doc["checks"]) == (code == 0)


def test_verify_bf_naive_reports_the_broken_bracket(capsys):
    _, out, _ = invoke(capsys, "verify", "--kind", "bf_naive")
    failed = {c["name"]: c["max_error"] for c in json.loads(out)["checks"] if not c["passed"]}
    assert failed["[J+,J-]-2hbar*Jz"] == pytest.approx(28.0)
    assert "casimir_closed_form" not in failed


def test_verify_bb_reports_prefactor_comparison(capsys):
    _, out, _ = invoke(capsys, "verify", "--kind", "bb", "--cutoff", "12")
    assert json.loads(out)["results"]["printed_prefactor_residual"] == pytest.approx(22.5)


@pytest.mark.parametrize("argv", [
    [],
    ["casimr"],
    ["casimir"],
    ["casimir", "--kind", "spin"],
    ["state", "--j", "x", "--m", "0"],
    ["state", "--j", "1", "--m", "0", "--output", "csv"],
    ["verify", "--kind", "bb", "--jz-form", "eq58"],
    ["state", "--j", "1", "--m", "2"],
    ["rotor", "--omega", "0"],
    ["partition", "--beta", "0"],
    ["partition", "--beta", "1,x"],
    ["partition", "--beta", "1", "--ensemble", "/nonexistent/modes.txt"],
    ["grassmann-derive", "--expr", "a +"],
])
def test_usage_and_domain_errors_exit_two(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.strip()


def test_help_exits_zero(capsys):
    code, out, _ = invoke(capsys, "--help")
    assert code == 0
    assert "schwingerlab" in out


def test_partition_csv(capsys):
    code, out, _ = invoke(capsys, "partition", "--kind", "fermion", "--beta", "0.5,1,2", "--output", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "beta,logZ_closed,logZ_trace,energy_closed,energy_fd"
    assert len(lines) == 4
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert float(row["logZ_closed"]) == math.log(2.2552519304127614)


def test_energy_sweep_boson(capsys):
    code, out, _ = invoke(capsys, "energy", "--kind", "boson", "--beta", "0.5,1,2,5")
    doc = json.loads(out)
    assert code == 0
    assert [c["name"] for c in doc["checks"]] == [f"energy@beta={b!r}" for b in (0.5, 1.0, 2.0, 5.0)]
    assert doc["results"]["modes"] == [{"kind": "boson", "omega": 1, "cutoff": 60}]


def test_energy_sweep_flags_truncated_high_temperature(capsys):
    code, out, _ = invoke(capsys, "partition", "--kind", "boson", "--beta", "0.1")
    assert code == 1
    code, _, _ = invoke(capsys, "partition", "--kind", "boson", "--beta", "0.1", "--cutoff", "400")
    assert code == 0


def test_casimir_csv(capsys):
    code, out, _ = invoke(capsys, "casimir", "--kind", "bb", "--cutoff", "5", "--output", "csv")
    lines = out.splitlines()
    assert lines[0] == "eigenvalue,multiplicity,j"
    rows = [line.split(",") for line in lines[1:]]
    assert [(r[1], r[2]) for r in rows] == [("1", "0"), ("2", "0.5"), ("3", "1"), ("4", "1.5")]
    assert [float(r[0]) for r in rows] == pytest.approx([0, 0.75, 2, 3.75], abs=1e-12)


def test_ensemble_file(tmp_path, capsys):
    path = tmp_path / "modes.txt"
    path.write_text("# two modes\nfermion 1.0\n\nboson 2.0 40  # tail\n")
    code, out, _ = invoke(capsys, "partition", "--ensemble", str(path), "--beta", "1")
    doc = json.loads(out)
    assert code == 0
    assert [m["kind"] for m in doc["results"]["modes"]] == ["fermion", "boson"]


@pytest.mark.parametrize("text, line", [
    ("boson 1.0\n", 1),
    ("fermion 1\n\nfermion x\n", 3),
    ("fermion 1\nboson 1.0 1\n", 2),
    ("quark 1\n", 1),
])
def test_ensemble_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(EnsembleParseError) as exc:
        parse_ensemble_text(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_ensemble_file_error_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("fermion 1\nboson two 3\n")
    code, _, err = invoke(capsys, "energy", "--ensemble", str(path), "--beta", "1")
    assert code == 2
    assert "line 2" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = invoke(capsys, "shift-check", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "shift-check"


def test_unwritable_output_falls_back_to_stdout(tmp_path, capsys):
    target = tmp_path / "missing" / "report.json"
    code, out, err = invoke(capsys, "rotor", "--out", str(target))
    assert code == 1
    doc = json.loads(out)
    assert doc["checks"][-1] == {"name": "io", "passed": False, "max_error": None}
    assert "cannot write" in err


def test_state_command(capsys):
    code, out, _ = invoke(capsys, "state", "--j", "3/2", "--m=-1/2")
    doc = json.loads(out)
    assert code == 0
    assert doc["results"]["occupations"] == [[1, 2]]
    assert doc["results"]["casimir_eigenvalue"] == 3.75


def test_rotor_command(capsys):
    _, out, _ = invoke(capsys, "rotor", "--omega", "1", "--beta", "1")
    res = json.loads(out)["results"]
    assert res["inertia"] == 1
    assert res["rotor_omega"] == math.sqrt(2)
    assert res["rotational_partition"] == 1 + 3 * math.exp(-1)


def test_grassmann_command(capsys):
    code, out, _ = invoke(capsys, "grassmann-derive", "--omega", "2",
                          "--expr", "(0,1/2)*psibar*psidot", "--wrt", "psidot", "--side", "right")
    res = json.loads(out)["results"]
    assert code == 0
    assert res["hamiltonian"] == "(-2,0)*psi*psibar"
    assert res["momentum_psi"] == "(0,-1/2)*psibar"
    assert res["derivative"] == "(0,1/2)*psibar"
    assert res["rotation_parameter"] == 1


def test_frequencies_command(capsys):
    _, out, _ = invoke(capsys, "frequencies", "--omega", "2")
    res = json.loads(out)["results"]
    assert res["frequencies"] == [2]
    assert res["comparison"]["half_frequency_claim"] == 1


# -- serialization --------------------------------------------------------------


@pytest.mark.parametrize("value, text", [
    (2 * math.cosh(0.5), "2.2552519304127614"),
    (0.1, "0.10000000000000001"),
    (-0.0, "0"),
    (0, "0"),
    (float("nan"), "null"),
    (float("inf"), "null"),
    (Fraction(3, 4), "0.75"),
    (True, "true"),
    (None, "null"),
    ({"a": [1, 2.5, "x"]}, '{"a":[1,2.5,"x"]}'),
])
def test_to_json(value, text):
    assert to_json(value) == text


def test_to_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        to_json(object())


def test_run_returns_report_without_printing(capsys):
    report = run(["casimir", "--kind", "ff"])
    assert isinstance(report, RunReport)
    assert capsys.readouterr().out == ""
    assert emit_report(report) == 0
