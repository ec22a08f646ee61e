import io
import json
import subprocess
import sys

import pytest

from corpus import NEGATIVE_TEXT
from sdsehopf.cli import main
from sdsehopf.families import Cycle
from sdsehopf.sdse import dump_system, load_system


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cycle4_file(tmp_path):
    p = tmp_path / "cycle4.json"
    p.write_text(dump_system(Cycle(4).build(12)))
    return str(p)


@pytest.fixture
def negative_file(tmp_path):
    p = tmp_path / "neg.json"
    p.write_text(NEGATIVE_TEXT)
    return str(p)


def test_gen_writes_a_loadable_system(capsys):
    code, out, _ = run(capsys, "gen", "cycle", "4")
    assert code == 0
    assert load_system(out) == Cycle(4).build(12)


def test_gen_then_check_through_stdin(capsys, monkeypatch):
    _, text, _ = run(capsys, "gen", "cycle", "4")
    code, out, _ = run(capsys, "check", "-", "-N", "12", stdin=text, monkeypatch=monkeypatch)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "hopf_up_to_N N=12"
    for row in lines[1:]:
        i, j, n, lam = row.split("\t")
        assert int(lam) == (1 if (int(i) + int(n) - int(j)) % 4 == 0 else 0)
    assert len(lines) == 1 + 16 * 11


def test_check_negative_control(capsys, negative_file, tmp_path):
    out_path = tmp_path / "verdict.txt"
    code, _, _ = run(capsys, "check", negative_file, "-N", "6", "-o", str(out_path))
    assert code == 1
    text = out_path.read_text()
    assert text.startswith("failed N=6\nwitness n=3 i=1 j=1")


def test_solve_weight_one(capsys, cycle4_file):
    code, out, _ = run(capsys, "solve", cycle4_file, "-N", "1")
    assert code == 0
    assert out == "".join(f"{i}\t1\t{i}\t1\n" for i in range(1, 5))


def test_solvers_agree_on_the_command_line(capsys, cycle4_file):
    _, a, _ = run(capsys, "solve", cycle4_file, "-N", "6")
    _, b, _ = run(capsys, "solve", cycle4_file, "-N", "6", "--method", "subst")
    assert a == b and "1\t4\t1[2[3[4]]]\t1" in a


def test_lambda_reports_levels_and_fits(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"indices": [1], "truncation": 7, "equations": {"1": "(1 - h1)^(-1)"}}))
    code, out, _ = run(capsys, "lambda", str(p))
    assert code == 0
    assert "level 1 0" in out and "fit 1 1 b=2 a~=1" in out


def test_classify_verbs(capsys, tmp_path, negative_file):
    _, text, _ = run(capsys, "gen", "intro", "-N", "6")
    p = tmp_path / "intro.json"
    p.write_text(text)
    code, out, _ = run(capsys, "classify", str(p))
    assert code == 0 and out.splitlines()[:2] == ["verdict fundamental", "I0 1:beta=2 2:beta=3"]
    code, out, _ = run(capsys, "classify", negative_file)
    assert code == 1 and out.startswith("verdict not_hopf")


def test_graph_verbs(capsys, cycle4_file):
    code, out, _ = run(capsys, "graph", cycle4_file)
    assert code == 0 and out == "1 -> 2\n2 -> 3\n3 -> 4\n4 -> 1\n"
    code, out, _ = run(capsys, "graph", cycle4_file, "--dot")
    assert code == 0 and out.startswith("digraph")


def test_prelie_verbs(capsys, cycle4_file, tmp_path):
    code, out, _ = run(capsys, "prelie", cycle4_file, "-N", "8", "--check-identity", "--check-assoc")
    assert code == 0
    assert "pre-Lie identity to grade 8: ok" in out
    assert "associative to grade 8: yes" in out and "all equations affine: yes" in out
    p = tmp_path / "geo.json"
    p.write_text(json.dumps({"indices": [1], "truncation": 7, "equations": {"1": "(1 - h1)^(-1)"}}))
    code, out, _ = run(capsys, "prelie", str(p), "--check-assoc")
    assert code == 0 and "associative to grade 8: no" in out and "witness" in out
    code, out, _ = run(capsys, "prelie", cycle4_file, "-N", "3")
    assert code == 0 and "1\t2\t1\t1" in out.splitlines()


@pytest.mark.parametrize(
    "text",
    [
        '{"indices": [1], "truncation": 4, "equations": {"1": "1 + h1 +"}}',
        '{"indices": [1], "truncation": 4, "equations": {"1": "h1"}}',
        "not json",
    ],
)
def test_bad_input_exits_with_two(capsys, tmp_path, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and err.startswith("sdsehopf check:")


def test_parse_error_reports_its_position(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"indices": [1, 2], "truncation": 4, "equations": {"1": "1 + h3", "2": "1 + h1"}}')
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "position 4" in err


def test_truncation_budget_exits_with_two(capsys, cycle4_file):
    code, _, err = run(capsys, "solve", cycle4_file, "-N", "20")
    assert code == 2 and "degree" in err


def test_missing_file_and_usage_errors(capsys):
    assert run(capsys, "check", "/nonexistent/file")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["check", "x", "-N", "0"])
    assert exc.value.code == 2


def test_outputs_are_byte_identical_across_runs(cycle4_file):
    cmd = [sys.executable, "-m", "sdsehopf.cli", "check", cycle4_file, "-N", "8"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True, env={"PYTHONHASHSEED": "123", "PATH": ""}).stdout
    assert a == b and a.startswith(b"hopf_up_to_N")


def test_console_script_is_installed():
    out = subprocess.run(["sdsehopf", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "classify" in out.stdout
