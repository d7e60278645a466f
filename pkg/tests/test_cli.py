import csv
import io
import json
import pathlib
import re

import jsonschema
import pytest
from gmpy2 import mpq

from dirichlet_lab import __version__
from dirichlet_lab.cli import main

SCHEMA = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
RATIONAL = re.compile(r"^-?[0-9]+(/[0-9]+)?$")


def run(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err, stdin=io.StringIO(stdin) if stdin else None)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv, stdin=None):
    code, out, err = run(*argv, stdin=stdin)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


def _walk_pairs(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _walk_pairs(v)
    elif isinstance(obj, list):
        if len(obj) == 2 and all(isinstance(v, str) and RATIONAL.match(v) for v in obj):
            yield obj
        for v in obj:
            yield from _walk_pairs(v)


def test_classify_example():
    doc = run_json("classify", "--x-rational", "5/8", "--psi", "scaled_dirichlet c=1",
                   "--window", "2:10")
    assert doc["tool_version"] == __version__
    assert doc["command"] == "classify" and doc["precision_bits"] == 128
    assert doc["result"]["summary"]["kind"] == "AllSatisfiedFrom"
    for lo, hi in _walk_pairs(doc["result"]):
        assert mpq(lo) <= mpq(hi)  # every enclosure parses back exactly


def test_construct_pipes_into_classify():
    code, out, err = run("construct", "--psi", "power_gap a=1 k=1", "--depth", "20")
    assert code == 0, err
    entries = json.loads(out)["result"]["entries"]
    assert len(entries) == 20
    doc = run_json("classify", "--x-json", "-", "--psi", "power_gap a=1 k=1", "--window", "1:20",
                   stdin=out)
    statuses = [v["status"] for v in doc["result"]["verdicts"]]
    assert "Satisfied" not in statuses
    assert statuses[:19] == ["Violated"] * 19


def test_montecarlo_is_byte_identical():
    argv = ("montecarlo", "--psi", "scaled_dirichlet c=7/10", "--samples", "60",
            "--window", "10:60", "--seed", "42")
    first, second = run(*argv), run(*argv, "--threads", "2")
    assert first[0] == 0 and first[1] == second[1]
    assert json.loads(first[1])["seed"] == 42


def test_csv_outputs():
    code, out, _ = run("asymptotics", "--values", "10,100", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["big_psi"] for r in rows] == ["10", "100"]
    assert mpq(rows[1]["ratio_lo"]) <= mpq(rows[1]["ratio_hi"])
    code, out, _ = run("montecarlo", "--psi", "power_gap a=1 k=1/2", "--samples", "20",
                       "--seed", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("psi,seed,samples")
    code, _, err = run("classify", "--x-rational", "1/3", "--psi", "scaled_dirichlet c=1",
                       "--window", "1:1", "--format", "csv")
    assert code == 2 and "csv" in err


@pytest.mark.parametrize("argv", [
    ("orbit", "--x-rational", "5/8", "--steps", "3"),
    ("an-measure", "--big-psi", "1"),
    ("series", "--psi", "log_gap a=1 k=2", "--N", "40"),
    ("product", "--x-entries", "1,2,1,2,1,2", "--psi", "scaled_dirichlet c=1/2", "--window", "1:4"),
    ("approx", "--x-interval", "61803/100000:61804/100000", "--psi", "scaled_dirichlet c=1/2",
     "--window", "1:4"),
    ("preimage", "--union", "0:1/2,2/3:1", "--truncation", "16"),
    ("mixing", "--word", "1,2", "--union", "0:1/3", "--gap", "1"),
    ("levy", "--samples", "4", "--depth", "20", "--seed", "7"),
    ("dani-r", "--psi", "scaled_dirichlet c=1/2", "--s", "3"),
    ("delta", "--matrix", '[["5/8"]]', "--s", "1"),
    ("dyn-classify", "--matrix", '[["1/3", "2/7"]]', "--psi", "scaled_dirichlet c=1/2", "--count", "3"),
    ("witness", "--matrix", "5/8", "--psi", "scaled_dirichlet c=1", "--horizon", "2:50"),
    ("cross-validate", "--x-rational", "355/1130", "--psi", "scaled_dirichlet c=7/10",
     "--window", "1:30"),
])
def test_every_subcommand_runs(argv):
    doc = run_json(*argv)
    assert doc["command"] == argv[0]


def test_worked_outputs():
    assert run_json("orbit", "--x-rational", "5/8", "--steps", "3")["result"]["orbit"] == \
        ["5/8", "3/5", "2/3", "1/2"]
    res = run_json("an-measure", "--big-psi", "1")["result"]
    assert res["intervals"] == [["0", "1/2"], ["2/3", "1"]] and res["lebesgue"] == "5/6"
    res = run_json("witness", "--matrix", "5/8", "--psi", "scaled_dirichlet c=1",
                   "--horizon", "2:50")["result"]
    assert res["certain_gaps"] == [["8", "8"]]


def test_approx_rendering_is_marked():
    doc = run_json("dani-r", "--psi", "scaled_dirichlet c=1/2", "--s", "3", "--approx")
    assert doc["result"]["r"]["approx"].startswith("~0.3465")


def test_precondition_errors_exit_2():
    code, _, err = run("classify", "--x-entries", "1,1,1", "--psi", "scaled_dirichlet c=1",
                       "--window", "1:9")
    assert code == 2 and "WindowTooDeep" in err and len(err.strip().splitlines()) == 1
    code, _, err = run("construct", "--psi", "scaled_dirichlet c=1", "--depth", "5")
    assert code == 2 and "PsiTooLarge" in err
    code, _, _ = run("classify", "--x-rational", "5/8", "--psi", "bogus", "--window", "1:2")
    assert code == 2
    code, _, _ = run("nonsense")
    assert code == 2


def test_require_decision_exit_3():
    argv = ("classify", "--x-entries", "1,1,1,1", "--psi", "scaled_dirichlet c=1", "--window", "4:4")
    assert run(*argv)[0] == 0
    assert run(*argv, "--require-decision")[0] == 3


def test_precision_flag_and_environment(monkeypatch):
    monkeypatch.setenv("DIRICHLET_LAB_PRECISION", "256")
    assert run_json("dani-r", "--psi", "scaled_dirichlet c=1/2", "--s", "3")["precision_bits"] == 256
    assert run_json("dani-r", "--psi", "scaled_dirichlet c=1/2", "--s", "3",
                    "--precision", "96")["precision_bits"] == 96
    monkeypatch.setenv("DIRICHLET_LAB_PRECISION", "lots")
    assert run("dani-r", "--psi", "scaled_dirichlet c=1/2", "--s", "3")[0] == 2


def test_integer_part_is_reported():
    doc = run_json("classify", "--x-rational", "13/8", "--psi", "scaled_dirichlet c=1",
                   "--window", "2:4")
    assert doc["parameters"]["integer_part_dropped"] == 1


def test_cross_validate_accepts_construct_output():
    _, out, _ = run("construct", "--psi", "power_gap a=1 k=1", "--depth", "8")
    doc = run_json("cross-validate", "--x-json", "-", "--psi", "power_gap a=1 k=1",
                   "--window", "1:6", stdin=out)
    assert doc["result"]["consistent"] is True
