import numpy as np
import pytest

from solitonkit import catalog


@pytest.fixture(scope="session")
def entries():
    """Catalog entries built once per session (charts cache compiled derivatives)."""
    cache = {}

    def get(name, **params):
        key = (name, tuple(sorted(params.items())))
        if key not in cache:
            cache[key] = catalog.make(name, **params)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def bryant_profiles():
    return {n: catalog.bryant_profile(n) for n in (3, 4, 5, 6)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bryant_point(n, r):
    """A point at radius r on an assembled Bryant chart, away from the sphere-chart poles."""
    angles = [1.1 + 0.2 * i for i in range(n - 2)] + [2.0]
    return np.array([r] + angles)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Record one summary line per acceptance criterion; printed at the end of the run."""

    def log(number, title, passed, seconds, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({seconds:.1f} s) {detail}".rstrip()
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
