import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from ergolab.cli import main

GOLDEN = Path(__file__).parent / "golden"
sys.path.insert(0, str(GOLDEN))
from regenerate import help_text, targets  # noqa: E402


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(targets()))
def test_help_matches_golden(name, monkeypatch):
    monkeypatch.setenv("COLUMNS", "100")
    assert help_text(*targets()[name]) == (GOLDEN / f"{name}.help.txt").read_text()


def test_check_independence_exit_codes(capsys):
    code, out, _ = run(capsys, "check-independence", "t^2")
    assert code == 1 and "lambda: 1" in out
    assert run(capsys, "check-independence", "sqrt(2)*t")[0] == 1
    code, out, _ = run(capsys, "check-independence", "sqrt(2)*t^2+t", "--format", "json")
    assert code == 0 and json.loads(out)["independent"] is True
    code, _, err = run(capsys, "check-independence", "sqrt(2)*t^^2")
    assert code == 2 and "error" in err


def test_weyl(capsys):
    code, out, _ = run(capsys, "weyl", "--poly", "sqrt(2)*t", "--N", "10000")
    assert code == 0
    assert json.loads(out)["checkpoints"][-1]["abs"] <= 1e-3


def test_average(capsys):
    code, out, _ = run(capsys, "average", "--system", "torus", "--alpha", "sqrt(3)", "--family", "sqrt(2)*t^2",
                       "--obs", "e(1x)", "--scheme", "cesaro", "--N", "1e5")
    rep = json.loads(out)
    assert code == 0 and rep["trend"] == "pass" and rep["target"] == [0.0, 0.0]


def test_configurations(capsys, tmp_path):
    code, out, _ = run(capsys, "configurations", "--set", "evens", "--family", "sqrt(2)*t", "--nmax", "100")
    d = json.loads(out)
    assert code == 0 and (d["m"], d["n"]) == (2, 2)
    target = tmp_path / "conf.tsv"
    assert main(["configurations", "--set", "evens", "--family", "sqrt(2)*t", "--nmax", "100",
                 "--format", "tsv", "--out", str(target)]) == 0
    assert target.read_text().splitlines()[1].split("\t")[:2] == ["2", "2"]


def test_counterexample_search(capsys):
    code, out, _ = run(capsys, "counterexample-search", "--m", "5", "--poly", "t^2")
    assert code == 0
    assert {"m": 5, "A": [0, 2], "average": "2/25", "bound": "4/25"} in json.loads(out)["violations"]
    assert run(capsys, "counterexample-search", "--m", "5", "--poly", "sqrt(2)*t^2")[0] == 2


def test_gowers(capsys):
    code, out, _ = run(capsys, "gowers", "--values", "1,1,1,1", "--k", "2")
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(1)


def test_usage_errors(capsys):
    assert run(capsys, "average", "--system", "cyclic", "--family", "t", "--obs", "1", "--N", "10")[0] == 2
    assert run(capsys, "average", "--system", "torus", "--alpha", "sqrt(2)", "--family", "t", "t",
               "--obs", "e(x)", "--N", "10")[0] == 2
    assert run(capsys, "average", "--system", "torus", "--alpha", "sqrt(2)", "--family", "t",
               "--obs", "e(x)", "--scheme", "w_tricked", "--N", "10")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ergolab", "check-independence", "t^2"], capture_output=True, text=True)
    assert res.returncode == 1


@pytest.mark.parametrize("argv", [
    ["average", "--system", "heisenberg", "--b", "sqrt(2),sqrt(3),1/3", "--family", "sqrt(2)*t^2+t",
     "--obs", "box 0 1/2 0 1/2 0 1/2", "--N", "20000", "--grid", "32"],
    ["wtrick", "--system", "torus", "--alpha", "sqrt(2)", "--family", "t", "--obs", "e(x)", "--w", "5",
     "--N", "20000"],
])
def test_output_independent_of_thread_count(argv, tmp_path):
    outs = set()
    for threads in ("1", "4", "8"):
        res = subprocess.run([sys.executable, "-m", "ergolab", *argv], capture_output=True,
                             env={**os.environ, "ERGOLAB_THREADS": threads})
        assert res.returncode in (0, 1), res.stderr
        outs.add(res.stdout)
    assert len(outs) == 1
