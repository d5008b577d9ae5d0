import csv
import io
import json
import subprocess
import sys

import pytest

from stochastik import zoo
from stochastik.cli import main

GAMBLER = {"states": ["0", "1", "2"], "rows": [[1, 0, 0], ["1/2", 0, "1/2"], [0, 0, 1]], "initial": [0, 1, 0]}
TWO_STATE = {"states": ["a", "b"], "rates": {"a->b": 2, "b->a": 3}}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, data in [("gambler", GAMBLER), ("gen", TWO_STATE), ("cities", {"coords": [[0, 0], [1, 0], [1, 1], [0, 1]]})]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths[name] = str(p)
    return paths


def test_zoo_verify_exits_zero(capsys):
    code, out, _ = run(capsys, "zoo", "verify", "tennis")
    rep = json.loads(out)
    assert code == 0 and rep["all_passed"] and rep["command"] == "zoo verify"


def test_zoo_verify_failure_exits_one(capsys):
    model = zoo.build("weather")
    broken = zoo.Oracle("pi", [0, 0, 1], model.oracles[0].compute, "deliberately wrong")
    zoo.REGISTRY["_broken"] = lambda: zoo.NamedModel("_broken", "test double", model.payload, (broken,))
    try:
        code, out, _ = run(capsys, "zoo", "verify", "_broken")
    finally:
        del zoo.REGISTRY["_broken"]
    assert code == 1 and json.loads(out)["all_passed"] is False


def test_unstable_queue_exits_one_with_json_error(capsys):
    code, out, err = run(capsys, "queue", "mm1", "--lambda", "3", "--mu", "2")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "StabilityError"


def test_missing_file_exits_two(capsys):
    code, _, err = run(capsys, "chain", "classify", "missing.json")
    assert code == 2 and json.loads(err)["error"] == "UsageError"


def test_text_errors_are_plain(capsys):
    code, _, err = run(capsys, "--format", "text", "queue", "mm1", "--lambda", "3", "--mu", "2")
    assert code == 1 and err.startswith("error: StabilityError")


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["queue", "mm1", "--lambda", "x", "--mu", "2"],
        ["poisson", "sample", "--rate", "1", "--horizon", "2"],
        ["ising", "--beta", "1", "--steps", "10", "--size", "0x3", "--seed", "1"],
        ["queue", "simulate", "--arrivals", "weird:1", "--service", "exp:2", "--horizon", "10", "--seed", "1"],
        ["zoo", "verify", "no-such-model"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_domain_error_from_file(capsys, files):
    code, _, err = run(capsys, "stationary", files["gambler"])
    assert code == 1 and json.loads(err)["error"] == "NotIrreducible"


def test_absorb_exact_report(capsys, files):
    code, out, _ = run(capsys, "absorb", files["gambler"])
    rep = json.loads(out)
    assert code == 0
    assert rep["transient"] == ["1"] and rep["absorbing"] == ["0", "2"]
    assert rep["B"] == [[{"exact": "1/2", "decimal": 0.5}, {"exact": "1/2", "decimal": 0.5}]]
    assert rep["averaged_absorption_time"]["exact"] == "1"


def test_backend_flag_and_environment(capsys, files, monkeypatch):
    _, out, _ = run(capsys, "--backend", "float", "absorb", files["gambler"])
    assert json.loads(out)["backend"] == "float" and "exact" not in json.loads(out)["B"][0][0]
    monkeypatch.setenv("STOCHASTIK_BACKEND", "float")
    _, out, _ = run(capsys, "absorb", files["gambler"])
    assert json.loads(out)["backend"] == "float"
    _, out, _ = run(capsys, "absorb", files["gambler"], "--backend", "exact")
    assert json.loads(out)["backend"] == "exact"
    monkeypatch.setenv("STOCHASTIK_BACKEND", "quantum")
    assert run(capsys, "absorb", files["gambler"])[0] == 2


def test_global_flags_before_subcommand(capsys):
    _, a, _ = run(capsys, "--format", "text", "--seed", "4", "poisson", "sample", "--rate", "1", "--horizon", "2")
    _, b, _ = run(capsys, "poisson", "sample", "--rate", "1", "--horizon", "2", "--seed", "4", "--format", "text")
    assert a == b and "seed: 4" in a


def test_text_format(capsys, files):
    code, out, _ = run(capsys, "jump", "stationary", files["gen"], "--format", "text")
    assert code == 0
    assert "pi: [3/5 (0.6), 2/5 (0.4)]" in out
    assert "reversible: True" in out


def test_csv_format_and_file(capsys, files, tmp_path):
    target = tmp_path / "law.csv"
    code, out, _ = run(capsys, "walk", "law", "--n", "6", "--format", "csv", "--csv", str(target))
    assert code == 0
    assert out == target.read_text()
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "P(tau0=n)"]
    assert rows[2] == ["2", "1/2"] and rows[4] == ["4", "1/8"]


def test_csv_without_table_is_key_value(capsys, files):
    _, out, _ = run(capsys, "jump", "stationary", files["gen"], "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert rows["command"] == "jump stationary"


def test_csv_file_needs_a_table(capsys, files, tmp_path):
    code, out, _ = run(capsys, "jump", "stationary", files["gen"], "--csv", str(tmp_path / "x.csv"))
    assert code == 2 and out == ""


def test_seed_and_generator_recorded(capsys, files):
    _, out, _ = run(capsys, "tsp", "anneal", "--input", files["cities"], "--steps", "2000", "--seed", "11", "--replicas", "3")
    rep = json.loads(out)
    assert rep["seed"] == 11
    assert rep["rng"]["seed"] == 11 and rep["rng"]["algorithm"]
    assert rep["best_length"]["decimal"] == pytest.approx(4.0)
    assert len(rep["lengths"]) == 3


RANDOMIZED = [
    ["poisson", "sample", "--rate", "3", "--horizon", "5", "--seed", "7"],
    ["ising", "--size", "8x8", "--beta", "0.4", "--steps", "20000", "--start", "random", "--seed", "7"],
    ["queue", "simulate", "--arrivals", "exp:1", "--service", "exp:2", "--horizon", "2000", "--replicas", "3", "--seed", "7"],
    ["tsp", "anneal", "--input", "CITIES", "--steps", "3000", "--replicas", "4", "--seed", "7", "--format", "csv"],
]


@pytest.mark.parametrize("argv", RANDOMIZED, ids=lambda a: "-".join(a[:2]))
def test_same_seed_same_bytes(capsys, files, argv):
    argv = [files["cities"] if a == "CITIES" else a for a in argv]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0 and first == second


def test_different_seed_differs(capsys):
    base = ["poisson", "sample", "--rate", "3", "--horizon", "5", "--format", "csv"]
    assert run(capsys, *base, "--seed", "1")[1] != run(capsys, *base, "--seed", "2")[1]


def test_separate_processes_agree(files):
    argv = [sys.executable, "-m", "stochastik.cli", "queue", "simulate", "--arrivals", "exp:1", "--service", "exp:2", "--horizon", "500", "--seed", "3"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a
