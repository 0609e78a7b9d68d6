"""Acceptance criteria, one test per criterion; each prints its pass/fail line."""

import time

import pytest

from cocycle_trace import acceptance
from cocycle_trace.cli import main
from cocycle_trace.results import dumps


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.CRITERIA[number]()
    print(result.line())
    assert result.passed, result.line()


def test_criterion_11_determinism(tmp_path):
    start = time.perf_counter()
    results, doc = acceptance.selftest()
    elapsed = time.perf_counter() - start
    determinism = results[-1]
    print(determinism.line())
    assert determinism.number == 11 and determinism.passed
    assert all(r.passed for r in results)
    assert elapsed < 60
    # CLI: two consecutive selftest runs write bit-identical documents
    assert main(["selftest", "--quiet", "--out", str(tmp_path / "a")]) == 0
    assert main(["selftest", "--quiet", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "selftest.json").read_bytes() == (tmp_path / "b" / "selftest.json").read_bytes()
    assert (tmp_path / "a" / "selftest.json").read_text() == dumps(doc)


def test_corrupted_oracle_fails_named_criterion(tmp_path, capsys):
    code = main(["selftest", "--quiet", "--corrupt-oracle", "1e-6", "--out", str(tmp_path)])
    assert code == 3
    err = capsys.readouterr().err
    assert "criterion 5" in err and "Wodzicki oracle" in err


def test_summary_lines(capsys):
    results, _ = acceptance.selftest()
    with capsys.disabled():
        print()
        for r in results:
            print(r.line())
    assert len(results) == 11
