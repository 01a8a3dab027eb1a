import numpy as np
import pytest

from homoverlap import qcore


def random_unitary(rng, dim=2):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, pure=False):
    """Random qubit state: a random-unitary conjugate of a random diagonal."""
    lam = 1.0 if pure else rng.uniform(0.5, 1.0)
    u = random_unitary(rng)
    m = u @ np.diag([lam, 1 - lam]) @ u.conj().T
    return qcore.QubitDensity((m + m.conj().T) / 2)


def random_pure(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return qcore.PureQubit(v[0], v[1])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance criterion reporting ---------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA.setdefault(mark.args[0], {"title": mark.args[1], "outcomes": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for number, entry in _CRITERIA.items():
        if report.nodeid.split("::")[-1].startswith(f"test_criterion_{number:02d}"):
            entry["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{status:7s} criterion {number:2d}: {entry['title']}")
