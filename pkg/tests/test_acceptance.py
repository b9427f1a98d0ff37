"""Acceptance battery. Each test prints one ``PASS``/``FAIL criterion N`` line
(visible without ``-s``) and asserts the criterion at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import sys

import pytest

from costshare import verify

SEED = 0
LIMITS = {1: 300.0, 2: 300.0, 8: 120.0}


@pytest.fixture(scope="module")
def nwa_result():
    return verify.check_nwa_theorem(SEED, count=200)


def report(capsys, number, result):
    limit = LIMITS.get(number)
    ok = result.passed and (limit is None or result.seconds <= limit)
    budget = f" (limit {limit:.0f}s)" if limit else ""
    line = (f"{'PASS' if ok else 'FAIL'} criterion {number}: {result.name} "
            f"[{result.seconds:.1f}s{budget}] {result.detail}")
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def test_criterion_01_nwa_bound(capsys, nwa_result):
    assert report(capsys, 1, nwa_result), nwa_result.detail


def test_criterion_02_spg_poa(capsys):
    res = verify.check_spg_poa(SEED, count=100)
    assert report(capsys, 2, res), res.detail


def test_criterion_03_psi_invariants(capsys):
    res = verify.check_psi_invariants(SEED, count=100, profiles=1000)
    assert report(capsys, 3, res), res.detail


def test_criterion_04_incremental_poa(capsys):
    res = verify.check_incremental_poa(SEED, count=100)
    assert report(capsys, 4, res), res.detail


def test_criterion_05_multicast_const(capsys):
    res = verify.check_multicast_const()
    assert report(capsys, 5, res), res.detail


def test_criterion_06_dag_convex(capsys):
    res = verify.check_dag_convex()
    assert report(capsys, 6, res), res.detail


def test_criterion_07_overcharge(capsys):
    res = verify.check_overcharge()
    assert report(capsys, 7, res), res.detail


def test_criterion_08_static_share(capsys):
    res = verify.check_static_share()
    assert report(capsys, 8, res), res.detail


def test_criterion_09_single_path(capsys):
    res = verify.check_single_path_optimum(SEED, count=100)
    assert report(capsys, 9, res), res.detail


def test_criterion_10_weights(capsys):
    res = verify.check_weight_path_independence(SEED, count=100)
    assert report(capsys, 10, res), res.detail


def test_criterion_11_no_ties(capsys, nwa_result):
    res = verify.check_no_ties(nwa_result)
    res.seconds = nwa_result.seconds
    assert report(capsys, 11, res), res.detail


if __name__ == "__main__":
    nwa = verify.check_nwa_theorem(SEED, count=200)
    checks = {
        1: nwa,
        2: verify.check_spg_poa(SEED),
        3: verify.check_psi_invariants(SEED),
        4: verify.check_incremental_poa(SEED),
        5: verify.check_multicast_const(),
        6: verify.check_dag_convex(),
        7: verify.check_overcharge(),
        8: verify.check_static_share(),
        9: verify.check_single_path_optimum(SEED),
        10: verify.check_weight_path_independence(SEED),
        11: verify.check_no_ties(nwa),
    }
    results = [report(None, k, v) for k, v in checks.items()]
    sys.exit(0 if all(results) else 1)
