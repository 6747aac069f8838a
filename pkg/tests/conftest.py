import numpy as np
import pytest


def assert_allclose_up_to_global_phase(actual, desired, atol):
    actual, desired = np.asarray(actual), np.asarray(desired)
    assert actual.shape == desired.shape
    flat = desired.reshape(-1)
    j = int(np.argmax(np.abs(flat)))
    phase = actual.reshape(-1)[j] / flat[j]
    assert abs(abs(phase) - 1) <= atol
    np.testing.assert_allclose(actual, phase * desired, rtol=0, atol=atol)


def random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def alpha_beta():
    rng = np.random.default_rng(1234)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        notes = dict(report.user_properties).get("note", "")
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, notes))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, note in _acceptance:
        line = f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  ({note})" if note else ""))
