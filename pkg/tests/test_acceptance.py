"""Acceptance criteria 1-9, one test each.

Each test prints ``C<k> PASS|FAIL <title> (<seconds> s, limit <bound> s)``
followed by the measured quantities; the lines are repeated in a summary
section at the end of the run.  Tolerances live in :mod:`lpnorm.verify`
and are pinned here so a change there cannot silently loosen a criterion.
"""

import subprocess
import sys
import time

import pytest

from lpnorm import verify

# tolerances and runtime limits pinned from the criteria
PINNED = {
    "SLOPE_MIN": 1.9,
    "SCALING_STEPS": (1e-2, 3e-3, 1e-3, 3e-4),
    "SERIES_SAMPLES": 1000,
}
RUNTIME_LIMIT = {1: 1.0, 2: 10.0, 4: 30.0, 6: 60.0}


def test_pinned_tolerances():
    assert verify.SLOPE_MIN == PINNED["SLOPE_MIN"]
    assert verify.SCALING_STEPS == PINNED["SCALING_STEPS"]
    assert verify.SERIES_SAMPLES == PINNED["SERIES_SAMPLES"]


def _run(number, check, log):
    start = time.perf_counter()
    result = check()
    elapsed = time.perf_counter() - start
    limit = RUNTIME_LIMIT.get(number)
    in_time = limit is None or elapsed < limit
    passed = result.passed and in_time
    bound = f", limit {limit:g} s" if limit is not None else ""
    head = f"C{number} {'PASS' if passed else 'FAIL'} {result.title} ({elapsed:.2f} s{bound})"
    log.append(head)
    print(head)
    for line in result.lines:
        print(f"    {line}")
    assert result.passed, "\n".join(result.lines)
    assert in_time, f"runtime {elapsed:.2f} s exceeds {limit} s"


def test_c1_critical_mass(acceptance_log):
    _run(1, verify.check_critical_mass, acceptance_log)


def test_c2_sensitivities(acceptance_log):
    _run(2, verify.check_sensitivities, acceptance_log)


def test_c3_frequencies(acceptance_log):
    _run(3, verify.check_frequencies, acceptance_log)


def test_c4_series_orders(acceptance_log):
    _run(4, verify.check_series_orders, acceptance_log)


def test_c5_normal_form(acceptance_log):
    _run(5, lambda: verify.check_normal_form(include_scaling=True), acceptance_log)


def test_c6_spectral(acceptance_log):
    _run(6, verify.check_spectral, acceptance_log)


def test_c7_series_algebra(acceptance_log):
    _run(7, verify.check_series_algebra, acceptance_log)


def test_c8_second_order(acceptance_log):
    _run(8, lambda: verify.check_second_order(include_perturbed=True), acceptance_log)


def test_c9_determinism(acceptance_log):
    def check():
        cmd = [sys.executable, "-m", "lpnorm.cli", "verify", "--suite", "classical"]
        runs = [subprocess.run(cmd, capture_output=True) for _ in range(2)]
        same = runs[0].stdout == runs[1].stdout and runs[0].returncode == runs[1].returncode
        lines = (
            f"two 'verify --suite classical' runs byte-identical: {same}",
            f"report size {len(runs[0].stdout)} bytes, exit status {runs[0].returncode}",
        )
        return verify.CriterionResult(9, "determinism", same and len(runs[0].stdout) > 0, lines)

    _run(9, check, acceptance_log)
