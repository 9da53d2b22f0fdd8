"""Acceptance criteria 1-9, each run through the ``qca check`` command.

Every criterion prints one ``criterion N (title): PASS/FAIL`` line. Criterion
9 reruns 1-8 on two worker processes and compares the CSV data sections byte
for byte with the single-process runs.
"""

import pytest

from qca import cli
from qca.acceptance import TITLES
from qca.io import data_section, read_csv

NUMBERS = range(1, 9)


def _check(number, directory, threads):
    code = cli.main(["check", "--criterion", str(number), "--threads", str(threads), "--output-dir", str(directory)])
    if code not in (0, 2):
        raise RuntimeError(f"check {number} exited with {code}")
    path = directory / f"check{number}.csv"
    meta, columns, rows = read_csv(path)
    return {"passed": bool(meta["passed"]), "path": path, "columns": columns, "rows": rows}


@pytest.fixture(scope="session")
def serial_runs(tmp_path_factory):
    directory = tmp_path_factory.mktemp("serial")
    return {n: _check(n, directory, 1) for n in NUMBERS}


@pytest.fixture(scope="session")
def pooled_runs(tmp_path_factory):
    directory = tmp_path_factory.mktemp("pooled")
    return {n: _check(n, directory, 2) for n in NUMBERS}


def _report(capsys, number, ok, detail=""):
    with capsys.disabled():
        print(f"\ncriterion {number} ({TITLES[number]}): {'PASS' if ok else 'FAIL'}{detail}")


def _failed_rows(run):
    passed, info = run["columns"].index("passed"), run["columns"].index("informational")
    return [row[:4] for row in run["rows"] if row[passed] != "1" and row[info] != "1"]


@pytest.mark.acceptance
@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(number, serial_runs, capsys):
    run = serial_runs[number]
    failed = _failed_rows(run)
    _report(capsys, number, run["passed"], "".join(f"\n    failed: {row}" for row in failed))
    assert run["passed"], failed


@pytest.mark.acceptance
def test_criterion_9(serial_runs, pooled_runs, capsys):
    differing = [n for n in NUMBERS if data_section(serial_runs[n]["path"]) != data_section(pooled_runs[n]["path"])]
    _report(capsys, 9, not differing, f"\n    differing: {differing}" if differing else "")
    assert not differing
