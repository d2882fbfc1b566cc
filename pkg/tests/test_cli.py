import pytest
from typer.testing import CliRunner

from ltg_equiv.cli import app, main

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture(autouse=True)
def small_limits(monkeypatch):
    monkeypatch.setenv("LTG_TEST_SET_CAP", "20000")
    monkeypatch.setenv("LTG_LOG_LEVEL", "WARNING")


def test_check_equivalent(files):
    result = invoke("check", files["m"], files["reordered"], "--dta", files["dta"])
    assert result.exit_code == 0
    assert "RESULT equivalent" in result.output


def test_check_inequivalent(files):
    result = invoke("check", files["m"], files["bad"], "--dta", files["dta"])
    assert result.exit_code == 1
    assert "RESULT inequivalent" in result.output
    assert "WITNESS f(k,k)" in result.output
    assert "LEFT abab" in result.output
    assert "RIGHT aba" in result.output


def test_check_cross_validated_lines_format(files):
    result = invoke("check", files["m"], files["bad"], "--dta", files["dta"],
                    "--cross-validate", "--depth", "3", "--format", "lines")
    assert result.exit_code == 1
    assert "NOTE " in result.output
    assert "oracle agrees up to depth 3" in result.output


def test_check_empty_domain(files):
    result = invoke("check", files["m"], files["m"], "--dta", files["empty"])
    assert result.exit_code == 2
    assert "RESULT empty-domain" in result.output


def test_check_reports_parse_errors(files, tmp_path):
    broken = tmp_path / "broken.lt"
    broken.write_text("alphabet f:2 g:1 k:0\noutput a b\naxiom _ q0 _\nrule q0 f -> c\n")
    result = invoke("check", files["m"], broken, "--dta", files["dta"])
    assert result.exit_code == 2
    assert "Error:" in result.output
    assert "broken.lt:4" in result.output


def test_eval(files):
    result = invoke("eval", files["m"], "--tree", "f(k,k)")
    assert result.exit_code == 0
    assert result.output.strip() == "abab"
    result = invoke("eval", files["m"], "--tree", "f(g(k),k)", "--format", "lines")
    assert "RESULT ababab" in result.output


def test_eval_outside_domain(files):
    result = invoke("eval", files["m"], "--tree", "g(k)", "--dta", files["dta"])
    assert result.exit_code == 2
    assert "not accepted" in result.output
    result = invoke("eval", files["m"], "--tree", "f(k")
    assert result.exit_code == 2


def test_normalize_round_trip(files, tmp_path):
    result = invoke("normalize", files["m"], "--dta", files["dta"])
    assert result.exit_code == 0
    assert "rule q0 f -> ab q2:1 b-a- q1:2 b" in result.output
    normalized = tmp_path / "normalized.lt"
    normalized.write_text(result.output)
    check = invoke("check", files["m"], normalized, "--dta", files["dta"])
    assert check.exit_code == 0


def test_normalize_empty_domain(files):
    result = invoke("normalize", files["m"], "--dta", files["empty"])
    assert result.exit_code == 2
    assert "RESULT empty-domain" in result.output


def test_abstract(files):
    result = invoke("abstract", files["m"], "--dta", files["dta"])
    assert result.exit_code == 0
    assert "q1 PERIODIC rep=a period=ba" in result.output
    assert "q2 PERIODIC rep=_ period=ab" in result.output
    result = invoke("abstract", files["m"], "--dta", files["dta"], "--format", "lines")
    assert "STATE q0 PERIODIC rep=_ period=ab" in result.output


def test_oracle(files):
    result = invoke("oracle", files["m"], files["bad"], "--dta", files["dta"], "--depth", "2")
    assert result.exit_code == 1
    assert "WITNESS f(k,k)" in result.output
    result = invoke("oracle", files["m"], files["m"], "--dta", files["dta"])
    assert result.exit_code == 0


def test_gen_prints_and_writes(tmp_path):
    result = invoke("gen", "--seed", "1")
    assert result.exit_code == 0
    assert "# seed 1: transducer" in result.output
    assert "dta start h0" in result.output
    out_dir = tmp_path / "instances"
    result = invoke("gen", "--seed", "1", "--out-dir", out_dir)
    assert result.exit_code == 0
    assert (out_dir / "instance-1.lt").exists()
    assert (out_dir / "instance-1.dta").exists()


def test_generated_instance_is_readable(tmp_path):
    invoke("gen", "--seed", "2", "--out-dir", tmp_path)
    lt, dta = tmp_path / "instance-2.lt", tmp_path / "instance-2.dta"
    result = invoke("oracle", lt, lt, "--dta", dta, "--depth", "3")
    assert result.exit_code == 0


def test_differential():
    result = invoke("differential", "--count", "2", "--depth", "3")
    assert "instances 2" in result.output
    assert result.exit_code == 0


def test_log_file(files, tmp_path):
    log_file = tmp_path / "run.log"
    result = invoke("--verbose", "--log-file", log_file, "eval", files["m"], "--tree", "f(k,k)")
    assert result.exit_code == 0
    assert log_file.exists()


def test_invalid_option_value(files):
    result = invoke("check", files["m"], files["m"], "--dta", files["dta"], "--bound", "0")
    assert result.exit_code == 2


def test_main_accepts_argv(files, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", str(files["m"]), "--tree", "f(k,k)"])
    assert exc.value.code == 0
    assert "abab" in capsys.readouterr().out


def test_check_with_search_tree_budget(files):
    result = invoke("check", files["m"], files["bad"], "--dta", files["dta"], "--search-trees", "1")
    assert result.exit_code == 1
    assert "RESULT inequivalent" in result.output
