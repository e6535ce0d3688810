import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from densitylab.cli import AnalysisReport, main
from densitylab.constructions import CmsnParams, build_cmsn
from densitylab.core import dumps_configuration

ROOT = Path(__file__).resolve().parents[1]
SYM = str(ROOT / "configs" / "symmetric.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def cli(*argv, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "densitylab", *argv], input=stdin, capture_output=True, text=True
    )


@pytest.fixture
def cmsn30(tmp_path):
    path = tmp_path / "c30.json"
    path.write_text(dumps_configuration(build_cmsn(CmsnParams.optimal(30))))
    return str(path)


def test_analyze_symmetric(capsys):
    code, out, _ = run(capsys, "analyze", SYM)
    data = json.loads(out)
    assert code == 0 and data["delta_star"] == "1/2" and data["delta_star_dec"] == 0.5
    assert F(data["delta_star"]) == 1 - min(F(e["escape"]) for e in data["endpoints"])


def test_analyze_is_byte_identical(capsys):
    _, a, _ = run(capsys, "analyze", SYM, "--delta", "3/10")
    _, b, _ = run(capsys, "analyze", SYM, "--delta", "3/10")
    assert a == b
    keys = list(json.loads(a))
    assert keys == sorted(keys)


def test_analysis_report_round_trip(capsys, cmsn30):
    _, out, _ = run(capsys, "analyze", cmsn30, "--delta", "29/100")
    data = json.loads(out)
    rep = AnalysisReport.from_json_dict(data)
    assert rep.to_json_dict() == data
    assert data["is_counterexample"] is True
    assert all(w is not None for w in data["witnesses"].values())


def test_analyze_writes_profiles(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", SYM, "--profiles", str(tmp_path / "prof"), "--samples", "2")
    files = sorted((tmp_path / "prof").iterdir())
    assert code == 0 and len(files) == 3
    assert files[0].read_text().startswith("omega,density\n")


def test_solve_cubic(capsys):
    code, out, _ = run(capsys, "solve-cubic", "upper")
    value, residual = out.split()
    assert code == 0 and value.startswith("0.271844")
    assert float(residual.split("=")[1]) < 1e-12
    code, out, _ = run(capsys, "solve-cubic", "kolyada", "--json")
    data = json.loads(out)
    assert data["value"].startswith("0.2807764") and data["residual"] < 1e-12


def test_construct_pipe_into_analyze():
    made = cli("construct", "cmsn", "--optimal", "--N", "1000")
    assert made.returncode == 0
    res = cli("analyze", "-", stdin=made.stdout)
    assert res.returncode == 0
    ds = float(F(json.loads(res.stdout)["delta_star"]))
    assert abs(ds - 0.27184) < 0.002


def test_construct_variants(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "cmsn", "--m", "1/2", "--s", "1/2", "--N", "2")
    assert code == 0 and json.loads(out) == {"intervals": [["1/2", "5/8"], ["3/4", "7/8"]]}
    code, out, _ = run(capsys, "construct", "cmsn", "--optimal", "--N", "10", "--table")
    assert code == 0 and {r["label"] for r in json.loads(out)["rows"]} == {"origin", "left", "last", "other"}
    code, out, _ = run(capsys, "construct", "h-approx", "--eps", "1/10", "--depth", "2", "--base", SYM)
    levels = json.loads(out)["levels"]
    assert levels[1] == [["2/5", "9/20"], ["1/2", "1"], ["21/20", "11/10"]]


def test_inspect_exit_codes(capsys, cmsn30):
    code, out, _ = run(capsys, "inspect", cmsn30, "--delta", "29/100")
    assert code == 0 and json.loads(out)["asserted_ok"] is True
    code, _, err = run(capsys, "inspect", SYM, "--delta", "3/10")
    assert code == 2 and "not a counterexample" in err


def test_check_lemma1(capsys):
    code, out, _ = run(capsys, "check-lemma1", "--trials", "50", "--delta", "1/4", "--seed", "1")
    assert code == 0 and json.loads(out)["violations"] == 0


def test_quarter_point(capsys):
    code, out, _ = run(capsys, "quarter-point", SYM)
    data = json.loads(out)
    assert code == 0 and data["endpoint"] == "0" and data["bound_holds"]


def test_optimize_outputs(capsys, tmp_path):
    trace, best = tmp_path / "t.csv", tmp_path / "best.json"
    argv = ["optimize", "--intervals", "2", "--restarts", "2", "--iters", "40", "--seed", "3",
            "--trace", str(trace), "--out", str(best)]
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert code == 0 and a == b
    data = json.loads(a)
    assert F(data["exact_objective"]) >= F(2629, 10000)
    code, out, _ = run(capsys, "analyze", str(best))
    assert json.loads(out)["delta_star"] == data["exact_objective"]
    assert trace.read_text().startswith("restart,iteration")


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "missing.json"],
        ["construct", "cmsn", "--N", "3"],
        ["construct", "h-approx"],
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("densitylab: error")


def test_malformed_json_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "analyze", str(bad))[0] == 2
    bad.write_text('{"intervals": [["1", "1/2"]]}')
    assert run(capsys, "analyze", str(bad))[0] == 2


@pytest.mark.parametrize("argv", [["analyze", SYM, "--delta", "x/y"], ["bogus"], ["analyze", SYM, "--nope"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_console_script_runs():
    res = subprocess.run(["densitylab", "solve-cubic", "lower"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("0.26")
