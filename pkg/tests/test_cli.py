from __future__ import annotations

import json
import subprocess
import sys

import pytest

from ldsrlars.cli import run
from ldsrlars.lars import parse_lars
from ldsrlars.transpile import canonical_program

TRAIN = "irregular :- train_pass, train_pass at least 1 in {1,2}.\n"
P2 = "#stream a/1.\n#stream b/2.\na(Y) :- a(X), b(X,Y).\n"
TRAIN_RHO7 = (
    "box( irregular <- wplus[0] at[T] true, (at[T1] train_pass and T1 = T-0),"
    " (at[T2] train_pass and (T2 = T-1 or T2 = T-2)) ).\n"
)


@pytest.fixture
def files(tmp_path, traffic_text):
    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return {
        "train": put("train.ldsr", TRAIN),
        "p2": put("p2.ldsr", P2),
        "traffic": put("traffic.lars", traffic_text),
        "empty": put("empty.ldsr", ""),
        "p2_stream": put("p2.stream", "".join(f"{i}: a(1) b(1,2)\n" for i in range(3))),
        "traffic_stream": put("traffic.stream", "0: onLane(v,1,2)\n1: onLane(v,1,2)\n3: onLane(w,1,1)\n"),
        "put": put,
    }


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_translate_rho7_prints_the_train_golden(files, capsys):
    code, out, _ = call(capsys, "translate", "--rho", "7", files["train"])
    assert code == 0
    program = "\n".join(l for l in out.splitlines() if not l.startswith("%"))
    assert canonical_program(parse_lars(program)) == canonical_program(parse_lars(TRAIN_RHO7))
    assert "% rule 0: source rule 0 via g_double_prime" in out


def test_translate_rho2_traffic(files, capsys):
    code, out, _ = call(capsys, "translate", "--rho", "2", files["traffic"])
    assert code == 0
    assert "#temp appears(Veh) :- onLane(Veh,X,Y), not inNetwork(Veh) in {1}." in out


def test_translate_structured_provenance(files, capsys):
    code, out, _ = call(capsys, "translate", "--rho", "4", "--format", "structured", files["train"])
    obj = json.loads(out)
    assert code == 0 and obj["rho"] == 4
    assert obj["provenance"][0] == {"output_rule": 0, "source_rule": 0, "helper": "g"}


def test_eval_input_deriver(files, capsys):
    code, out, _ = call(
        capsys, "eval", "--lang", "ldsr", "--stream", files["p2_stream"], "--t", "2", "--profile", "atomic", files["p2"]
    )
    assert code == 0
    assert "2: a(1) a(2) b(1,2)" in out.splitlines()


def test_eval_structured(files, capsys):
    code, out, _ = call(capsys, "eval", "--stream", files["p2_stream"], "--format", "structured", files["p2"])
    obj = json.loads(out)
    assert obj["profile"] == "atomic" and obj["t"] == 2 and obj["n"] == 2
    assert obj["slots"][2] == ["a(1)", "a(2)", "b(1,2)"]


def test_parse_empty_file(files, capsys):
    code, out, _ = call(capsys, "parse", files["empty"])
    assert code == 0 and out.strip() == ""


def test_parse_error_exits_one(files, capsys):
    bad = files["put"]("bad.ldsr", "a :- b at least in {1}.")
    code, _, err = call(capsys, "parse", bad)
    assert code == 1 and "bad.ldsr" in err


def test_parse_round_trip(files, capsys, tmp_path):
    _, first, _ = call(capsys, "parse", files["traffic"])
    again = files["put"]("again.lars", first)
    _, second, _ = call(capsys, "parse", again)
    assert first == second


def test_classify(files, capsys):
    code, out, _ = call(capsys, "classify", files["traffic"])
    assert code == 0
    assert out.splitlines()[:2] == ["F1: yes", "F2: yes"]
    assert out.splitlines()[2].startswith("F3: no (type-I rule")


def test_classify_structured(files, capsys):
    _, out, _ = call(capsys, "classify", "--format", "structured", files["train"])
    obj = json.loads(out)
    assert obj["F7"]["member"] and not obj["F5"]["member"]


def test_fragment_violation_exits_one(files, capsys):
    code, _, err = call(capsys, "translate", "--rho", "5", files["train"])
    assert code == 1 and "fragment violation" in err


def test_diff_equal(files, capsys, tmp_path):
    _, out, _ = call(capsys, "translate", "--rho", "2", files["traffic"])
    dst = files["put"]("traffic.ldsr", out)
    code, out, _ = call(
        capsys, "diff", files["traffic"], dst, "--stream", files["traffic_stream"], "--profile", "bound", "--strict"
    )
    assert code == 0
    assert out.splitlines() == [f"t={t}: equal" for t in range(4)]


def test_diff_unequal(files, capsys):
    other = files["put"]("other.ldsr", "#stream a/1.\n#stream b/2.\n")
    code, out, _ = call(capsys, "diff", files["p2"], other, "--stream", files["p2_stream"], "--t", "1")
    assert code == 1
    assert out.splitlines()[0] == "t=1: differ at 1"


def test_signature_file(files, capsys):
    sig = files["put"]("sig.decl", "#stream a/1.\n#stream b/2.\n")
    prog = files["put"]("bare.ldsr", "a(Y) :- a(X), b(X,Y).\n")
    code, out, _ = call(capsys, "classify", "--signature", sig, prog)
    assert code == 0 and "F4: no" in out


def test_conflicting_signature(files, capsys):
    sig = files["put"]("sig.decl", "#stream a/2.\n")
    code, _, _ = call(capsys, "parse", "--signature", sig, files["p2"])
    assert code == 1


def test_fuzz(capsys):
    code, out, _ = call(capsys, "fuzz", "--fragment", "F6", "--rho", "6", "--profile", "full", "--trials", "5")
    assert code == 0 and out.strip() == "F6 rho6 full strict: 5/5 passed"


def test_fuzz_structured_records(capsys):
    argv = ["fuzz", "--fragment", "F4", "--rho", "4", "--profile", "bound", "--trials", "2", "--seed", "9"]
    code, out, _ = call(capsys, *argv, "--format", "structured")
    rec = json.loads(out)
    assert code == 0 and [r["seed"] for r in rec] == [9, 10]
    assert rec[0]["strict"] is False and rec[0]["verdict"] == "pass"


def test_fuzz_rejects_ungranted_profile(capsys):
    code, _, err = call(capsys, "fuzz", "--fragment", "F4", "--rho", "4", "--profile", "full")
    assert code == 2 and "full" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["translate", "--rho", "9", "x.ldsr"],
        ["eval", "missing.ldsr"],
        ["parse", "--format", "xml", "x.ldsr"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2


def test_eval_requires_stream(files, capsys):
    code, _, err = call(capsys, "eval", files["train"])
    assert code == 2 and "--stream" in err


def test_console_entry_point(files):
    res = subprocess.run(
        [sys.executable, "-m", "ldsrlars.cli", "classify", files["train"]], capture_output=True, text=True
    )
    assert res.returncode == 0 and "F7: yes" in res.stdout
