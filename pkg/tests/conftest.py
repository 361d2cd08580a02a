import numpy as np
import pytest

from haarspacing.rng import RandomStream


class ScriptedNormals:
    """Stand-in stream returning a fixed sequence of normals."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        self.consumed = 0

    def normal(self, size):
        out = self.values[self.consumed:self.consumed + size]
        self.consumed += size
        return out


@pytest.fixture
def stream():
    def make(index=0, seed=12345, dim=0):
        return RandomStream.for_matrix(seed, dim, index)

    return make


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cached_source():
    """Spectra source that draws each (dim, n, seed) data set once per session."""
    import os

    from haarspacing.experiments import iter_spectra

    workers = int(os.environ.get("HAARSPACING_TEST_WORKERS", "1"))
    cache = {}

    def source(dim, n, seed):
        key = (dim, n, seed)
        if key not in cache:
            cache[key] = list(iter_spectra(dim, n, seed, workers=workers))
        return cache[key]

    return source


@pytest.fixture
def criterion():
    """Record a one-line verdict for the acceptance summary, then assert it."""

    def check(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
