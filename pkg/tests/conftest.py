import functools
from functools import reduce

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PAULI_2x2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_word(word: str) -> np.ndarray:
    """Dense matrix of a word with qubit 0 as the rightmost tensor factor."""
    return reduce(np.kron, [PAULI_2x2[s] for s in reversed(word)])


def kron_sum(words: dict) -> np.ndarray:
    return sum(c * kron_word(w) for w, c in words.items())


@functools.lru_cache(maxsize=None)
def _bundled(name):
    from coadapt.io import bundled_path, load_hamiltonian

    return load_hamiltonian(bundled_path(name))


@pytest.fixture(scope="session")
def h2():
    return _bundled("h2")


@pytest.fixture(scope="session")
def h4():
    return _bundled("h4")


@pytest.fixture(scope="session")
def h6():
    return _bundled("h6")


# --- acceptance reporting ------------------------------------------------------------

_CRITERIA: dict[int, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if hasattr(report, "wasxfail"):
            status = "xfail" if report.skipped else "xpass"
        elif report.skipped:
            status = "skipped"
        else:
            status = report.outcome
        _CRITERIA.setdefault(marker.args[0], []).append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        results = _CRITERIA[num]
        failed = [n for n, s in results if s in ("failed", "xpass")]
        xfailed = [n for n, s in results if s == "xfail"]
        skipped = [n for n, s in results if s == "skipped"]
        ran = [n for n, s in results if s == "passed"]
        if failed:
            verdict = "FAIL"
        elif not ran and xfailed:
            verdict = "FAIL (expected; unattainable, see xfail reasons)"
        elif not ran:
            verdict = "NOT RUN"
        elif xfailed:
            verdict = "PARTIAL (xfail cases are unattainable, see reasons)"
        else:
            verdict = "PASS"
        note = f"{len(ran)} passed"
        if xfailed:
            note += f", {len(xfailed)} xfail: {', '.join(xfailed)}"
        if skipped:
            note += f", {len(skipped)} skipped"
        if failed:
            note += f", failed: {', '.join(failed)}"
        terminalreporter.write_line(f"criterion {num}: {verdict} ({note})")
