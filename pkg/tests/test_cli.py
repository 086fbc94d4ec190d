import json
import math
import subprocess
import sys

import pytest

from sel_lab.cli import EXIT_INVALID, EXIT_NUMERICAL, SCHEMA, main, read_config, sweep

P3 = ["-N", "3", "-a", "0", "-b", "0", "-c", "0"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_laplacian(capsys):
    code, out, _ = run(["classify", *P3, "-p", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA and doc["config"]["subcommand"] == "classify"
    res = doc["results"][0]
    assert res["verdict"] == "GeneratesIntOnly"
    assert (res["interval"]["lo"], res["interval"]["hi"]) == (0.0, 3.0)
    assert not res["interval"]["lo_closed"] and not res["interval"]["hi_closed"]


def test_classify_critical_example(capsys):
    code, out, _ = run(["classify", "-N", "4", "-a", "0", "-b", "-1", "-c", "0", "-p", "4"], capsys)
    res = json.loads(out)["results"][0]
    assert res["generates"] and res["interval"]["lo_closed"] and res["interval"]["hi_closed"]
    assert res["equalities"]["int_eq_max"] is True


def test_classify_no_generation(capsys):
    code, out, _ = run(["classify", "-N", "2", "-a", "3", "-b", "0", "-c", "0", "-p", "2"], capsys)
    assert json.loads(out)["results"][0]["verdict"] == "NoRealizationGenerates"


def test_classify_csv(capsys):
    code, out, _ = run(["classify", *P3, "-p", "2", "3/2", "4", "--format", "csv"], capsys)
    lines = out.split("\n")
    assert "\r" not in out and lines[0].startswith("p,N_over_p,verdict")
    assert [line.split(",")[0] for line in lines[1:4]] == ["2", "3/2", "4"]


def test_bessel_half_integer(capsys):
    code, out, _ = run(["bessel", "--nu", "0.5", "--x", "1"], capsys)
    d = json.loads(out)["results"][0]
    assert d["I"] == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1), rel=1e-12)
    assert d["K"] == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-12)


def test_oscillate_table(capsys, tmp_path):
    phi = tmp_path / "phi.csv"
    code, out, _ = run(["oscillate", "-N", "3", "-a", "0", "-b", "-1", "-c", "0", "--lambda", "1", "--format", "csv", "--phi-csv", str(phi)], capsys)
    assert code == 0
    rows = out.strip().split("\n")
    assert rows[0] == "lambda,index,s" and len(rows) - 1 >= 10
    prof = phi.read_text().strip().split("\n")
    assert prof[0] == "lambda,r,phi"
    assert all(float(line.split(",")[2]) >= 0 for line in prof[1:])


def test_verify_dissipativity(capsys):
    code, out, _ = run(["verify", "--suite", "dissipativity", "--seed", "7"], capsys)
    card = json.loads(out)["scorecard"]["dissipativity"]
    assert card["draws"] == card["passed"] == 200
    assert card["im_bound_passed"] == card["im_bound_checked"]


def test_solve_and_evolve(capsys):
    code, out, _ = run(["solve", *P3, "--lambda", "2", "--grid-n", "2000"], capsys)
    d = json.loads(out)["results"][0]
    assert d["discrepancy"] <= 1e-4 and set(d["methods"]) == {"Green", "FiniteDifference"}
    code, out, _ = run(["evolve", "-N", "3", "-a", "2", "-b", "0", "-c", "0", "-p", "2", "--dt", "0.01", "-T", "0.1"], capsys)
    r = json.loads(out)["results"][0]
    assert r["bound_ok"] and r["positive"] and r["omega_p"] == pytest.approx(-0.75)


DETERMINISM = [
    ["classify", *P3, "-p", "2", "3", "4/3"],
    ["solve", *P3, "--lambda", "1", "10", "1+1j", "--grid-n", "1500"],
    ["evolve", *P3, "-p", "2", "--dt", "0.01", "-T", "0.05", "--grid-n", "1000"],
    ["oscillate", "-N", "3", "-a", "0", "-b", "-1", "-c", "0", "--lambda", "1", "4"],
    ["verify", "--suite", "coercivity", "violation", "--seed", "3"],
    ["bessel", "--nu", "0", "0.3", "2.7", "--x", "0.1", "5", "40"],
]


@pytest.mark.parametrize("argv", DETERMINISM, ids=lambda a: a[0])
def test_byte_identical_and_thread_independent(argv, capsys, monkeypatch):
    monkeypatch.setenv("SEL_LAB_THREADS", "1")
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    monkeypatch.setenv("SEL_LAB_THREADS", "4")
    c = run(argv, capsys)[1]
    assert a == b == c and a.endswith("\n")


INVALID = [
    ["classify", "-N", "0", "-a", "0", "-b", "0", "-c", "0", "-p", "2"],
    ["classify", "-N", "3", "-a", "x", "-b", "0", "-c", "0", "-p", "2"],
    ["classify", *P3, "-p", "1"],
    ["classify", *P3],
    ["classify", "-N", "3", "-p", "2"],
    ["solve", "-N", "3", "-a", "0", "-b", "-1", "-c", "0"],
    ["solve", *P3, "--lambda", "-1"],
    ["oscillate", *P3, "--lambda", "1"],
    ["bessel", "--nu", "-1", "--x", "1"],
    ["evolve", *P3, "-p", "2", "--dt", "0.03", "-T", "0.1"],
    ["verify", "--suite", "nope"],
    ["frobnicate"],
]


@pytest.mark.parametrize("argv", INVALID, ids=lambda a: " ".join(a[:3]))
def test_invalid_input_exit_code(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_INVALID and out == ""
    assert err


def test_invalid_diagnostic_is_structured(capsys):
    code, out, err = run(["classify", *P3, "-p", "1"], capsys)
    doc = json.loads(err)
    assert doc["error"]["kind"] == "InvalidInput" and "p must lie" in doc["error"]["message"]


def test_numerical_failure_exit_code(capsys):
    code, out, err = run(["solve", *P3, "--lambda", "1e200"], capsys)
    assert code == EXIT_NUMERICAL
    assert json.loads(err)["error"]["kind"] == "NumericalFailure"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# fixture\nN = 3\nalpha = 0\nb = 0\nc = 0\np = 2, 4\n")
    code, out, _ = run(["classify", "--config", str(cfg)], capsys)
    doc = json.loads(out)
    assert [r["p"] for r in doc["results"]] == [2, 4]
    code, out, _ = run(["classify", "--config", str(cfg), "-p", "3"], capsys)
    assert [r["p"] for r in json.loads(out)["results"]] == [3]
    bad = tmp_path / "bad.cfg"
    bad.write_text("N 3\n")
    assert run(["classify", "--config", str(bad)], capsys)[0] == EXIT_INVALID
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("colour = blue\n")
    assert run(["classify", "--config", str(unknown)], capsys)[0] == EXIT_INVALID
    assert read_config(str(cfg))["p"] == ["2", "4"]


def test_output_file(tmp_path, capsys):
    path = tmp_path / "o.json"
    code, out, _ = run(["classify", *P3, "-p", "2", "--output", str(path)], capsys)
    assert code == 0 and out == ""
    data = path.read_bytes()
    assert b"\r" not in data and json.loads(data)["schema"] == SCHEMA


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("SEL_LAB_THREADS", "zero")
    assert run(["classify", *P3, "-p", "2", "3"], capsys)[0] == EXIT_INVALID


def test_sweep_keeps_order(monkeypatch):
    import time

    monkeypatch.setenv("SEL_LAB_THREADS", "4")

    def slow(i):
        time.sleep(0.01 * (5 - i))
        return i

    assert sweep(slow, range(5)) == [0, 1, 2, 3, 4]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sel_lab", "classify", *P3, "-p", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["results"][0]["generates"]
