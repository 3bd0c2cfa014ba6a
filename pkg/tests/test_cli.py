import json
import subprocess
import sys

import pytest

from csu.cli import main
from csu.fixtures import load, path as fixture_path
from csu.fo_match import words_up_to

WORKED = str(fixture_path("worked"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_encode_alias(capsys):
    code, out, _ = run(capsys, "encode", "fixtures/worked.cfg", "--word", "aaabbababba", "--alias")
    assert (code, out) == (0, "2 4 9 ~9 ~4 5 ~5 ~2\n")


def test_member_via_matching_negative(capsys):
    assert run(capsys, "member", WORKED, "--word", "aa", "--via", "matching")[:2] == (1, "false\n")


def test_probe_clean(capsys):
    code, out, _ = run(capsys, "probe", WORKED, "--max-len", "10")
    assert code == 0 and "flagged: 0" in out


def test_probe_flags_ambiguity(capsys):
    code, out, _ = run(capsys, "probe", "ambiguous", "--max-len", "5", "--json")
    data = json.loads(out)
    assert code == 1 and data["flagged"] >= 1
    assert any(r["word"] == "aabbb" and r["trees"] == 2 for r in data["records"])


def test_encode_tuples_and_non_member(capsys):
    code, out, _ = run(capsys, "encode", "worked", "--word", "abba")
    assert (code, out) == (0, "0.0.1.1.0.1 ~0.0.1.1.0.1\n")
    assert run(capsys, "encode", "worked", "--word", "ab")[:2] == (1, "")


def test_decode_and_check(capsys):
    code, out, _ = run(capsys, "decode", "worked", "--dyck", "2 4 9 ~9 ~4 5 ~5 ~2")
    assert (code, out) == (0, "(0.2 (1.2 (2.1)) (2.1))\naaabbababba\n")
    code, out, _ = run(capsys, "check", "worked", "--dyck", "2 5 ~5 4 ~4 ~2")
    assert code == 1 and out.splitlines()[0] == "dyck: true" and "C3" in out
    assert run(capsys, "check", "worked", "--dyck", "1 ~1")[0] == 0


def test_brackets(capsys):
    code, out, _ = run(capsys, "brackets", "worked")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 9
    assert lines[0].split()[:2] == ["1", "0.0.1.1.0.1"]
    code, out, _ = run(capsys, "brackets", "worked", "--json")
    assert len(json.loads(out)["brackets"]) == 9


def test_formula(capsys):
    code, out, _ = run(capsys, "formula", "worked", "--psi-g")
    assert code == 0 and out.startswith("(") and "arc" in out
    literal = run(capsys, "formula", "worked", "--psi-g", "--literal")[1]
    assert literal != out
    local = run(capsys, "formula", "worked", "--local", "--alias")[1]
    assert "(letter ~1 (s x))" in local


def test_normalize(capsys, tmp_path):
    src = tmp_path / "g.cfg"
    src.write_text("start: S\nS -> a S b | a b\n")
    code, out, _ = run(capsys, "normalize", str(src), "--dgnf")
    assert code == 0 and "start: S" in out
    again = tmp_path / "h.cfg"
    again.write_text(out)
    for w in ["ab", "aabb", "aab"]:
        assert run(capsys, "member", str(src), "--word", w)[1] == run(capsys, "member", str(again), "--word", w)[1]
    code, out, _ = run(capsys, "normalize", "worked", "--injective-patterns")
    assert code == 0 and out == load("worked").to_text()


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["member", "worked", "--word", "ab", "--via", "magic"])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["member", "/nonexistent/g.cfg", "--word", "ab"],
        ["member", "worked", "--word", "abc"],
        ["decode", "worked", "--dyck", "2 ~4"],
        ["decode", "worked", "--dyck", "42"],
        ["formula", "ambiguous-missing", "--psi-g"],
    ],
)
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 3 and err.startswith("csu: error:")


def test_bad_grammar_file(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("S -> a\n")
    assert run(capsys, "brackets", str(bad))[0] == 3
    nondgnf = tmp_path / "n.cfg"
    nondgnf.write_text("start: S\nS -> X a\nX -> b\n")
    assert run(capsys, "formula", str(nondgnf), "--psi-g")[0] == 3


@pytest.mark.parametrize("name", ["worked", "ambiguous"])
def test_membership_methods_agree(capsys, name):
    g = load(name)
    for w in words_up_to(g.terminals, 7):
        text = "".join(w)
        results = {run(capsys, "member", name, "--word", text, "--via", via)[:2] for via in ("earley", "matching", "encoding")}
        assert len(results) == 1, text


def test_output_is_deterministic():
    argv = [sys.executable, "-m", "csu", "probe", "ambiguous", "--max-len", "6"]
    first = subprocess.run(argv, capture_output=True)
    second = subprocess.run(argv, capture_output=True)
    assert first.returncode == 1 and first.stdout == second.stdout and first.stdout
