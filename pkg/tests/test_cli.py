import json
import subprocess
import sys

import numpy as np
import pytest

from pgabase.cli import main
from pgabase.regressor import read_binary


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name,d,base", [("puma560", 24, 36), ("go2", 36, 94),
                                         ("2rru1rrs", 45, 25), ("2prs1psr", 47, 23)])
def test_analyze_demos(capsys, name, d, base):
    code, out, _ = run(capsys, "analyze", f"{name}.json")
    report = json.loads(out)
    assert code == 0
    assert report["nullspace_dimension"] == d and report["base_parameters"] == base
    assert len(report["columns"]) == d and report["provenance"]


def test_analyze_with_gravity_override(capsys):
    _, out, _ = run(capsys, "analyze", "puma560", "--gravity", "9.81,0,0")
    report = json.loads(out)
    assert report["nullspace_dimension"] == 22 and report["gravity"] == [9.81, 0.0, 0.0]


def test_analyze_csv_and_out(tmp_path, capsys):
    target = tmp_path / "report.csv"
    code, out, _ = run(capsys, "analyze", "puma560", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = dict(line.split(",", 1) for line in target.read_text().splitlines()[1:])
    assert rows["nullspace_dimension"] == "24"
    assert rows["columns.0.principle"] in {"1", "2", "3"}


def test_analyze_export_basis(tmp_path, capsys):
    target = tmp_path / "bnull.bin"
    run(capsys, "analyze", "puma560", "--export-basis", str(target))
    assert read_binary(target).shape == (60, 24)


def test_validate_passes_and_exports(tmp_path, capsys):
    target = tmp_path / "y.csv"
    code, out, _ = run(capsys, "validate", "puma560", "--samples", "20", "--seed", "3",
                       "--export-y", str(target))
    report = json.loads(out)
    assert code == 0 and report["result"] == "PASS"
    assert report["numerical"]["rank"] == 36 and report["numerical"]["rank_matches_analytical"]
    assert np.loadtxt(target, delimiter=",").shape == (120, 60)


def test_validate_pkm_reports_rejections(capsys):
    code, out, _ = run(capsys, "validate", "2prs1psr", "--samples", "40", "--seed", "7")
    report = json.loads(out)
    assert code == 0 and report["result"] == "PASS"
    s = report["sampling"]
    assert s["samples"] == 40
    assert s["accepted"] + s["rejected_out_of_workspace"] + s["rejected_condition"] + s["rejected_singular"] == 40


def test_validate_is_deterministic(capsys):
    args = ("validate", "2rru1rrs", "--samples", "15", "--seed", "11")
    first = run(capsys, *args)[1]
    assert run(capsys, *args)[1] == first
    assert run(capsys, "validate", "2rru1rrs", "--samples", "15", "--seed", "12")[1] != first


def test_validate_q_ranges(capsys):
    code, out, _ = run(capsys, "validate", "puma560", "--samples", "10",
                       "--q-ranges=" + ",".join(["-0.5:0.5"] * 6))
    assert code == 0 and json.loads(out)["result"] == "PASS"


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "go2", "--repetitions", "3")
    report = json.loads(out)
    assert code == 0 and report["repetitions"] == 3 and report["nullspace_dimension"] == 36
    assert 0 < report["min_ms"] <= report["median_ms"] <= report["max_ms"]


@pytest.mark.parametrize("argv", [
    ("validate", "go2", "--samples", "0"),
    ("bench", "puma560", "--repetitions", "0"),
    ("analyze", "nosuchrobot"),
    ("analyze", "puma560", "--gravity", "1,2"),
    ("validate", "puma560", "--q-ranges", "0:1"),
    ("validate", "2prs1psr", "--samples", "3", "--cond-gate", "1"),
])
def test_errors_exit_with_code_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and "error:" in err


def test_bad_robot_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 2 and "bad.json:1:2" in err


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "pgabase", "analyze", "2prs1psr"],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0
    assert json.loads(done.stdout)["nullspace_dimension"] == 47
