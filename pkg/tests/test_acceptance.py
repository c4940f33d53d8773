"""One test per acceptance criterion; each prints a single pass/fail line."""
import pytest

from evpos import acceptance
from evpos.cli import dumps

from conftest import ACCEPTANCE_LINES


def _check(k):
    r = acceptance.CRITERIA[k - 1]()
    line = r.line()
    ACCEPTANCE_LINES.append((k, line))
    print(line)
    assert r.passed, line + "\n" + dumps(r.detail)


def test_criterion_01_spiral3():
    _check(1)


def test_criterion_02_two_by_two():
    _check(2)


def test_criterion_03_finite_dim_equivalence():
    _check(3)


def test_criterion_04_thermostat():
    _check(4)


def test_criterion_05_ones_robin():
    _check(5)


def test_criterion_06_delay():
    _check(6)


def test_criterion_07_network_flow():
    _check(7)


def test_criterion_08_clamped_beam():
    _check(8)


def test_criterion_09_squared_laplacian():
    _check(9)


def test_criterion_10_dtn_disk():
    _check(10)


def test_criterion_11_bose():
    _check(11)


def test_criterion_12_oracles():
    _check(12)


def test_criterion_13_projection_audit():
    _check(13)
