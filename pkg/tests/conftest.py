import numpy as np
import pytest

from twrn_rd import JointSource, SolverConfig, binary_entropy, dsbs_source


def h(p):
    return binary_entropy(p)


@pytest.fixture
def dsbs25():
    return dsbs_source(0.25)


@pytest.fixture
def indep():
    """Independent uniform binaries with Hamming distortions."""
    return JointSource.from_arrays(np.full((2, 2), 0.25))


@pytest.fixture
def cfg():
    return SolverConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
