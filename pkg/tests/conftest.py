import numpy as np
import pytest

from fxtmrac.config import build_design, load_config

A_SEC5 = np.array([[0.0, 1.0], [-5.0, -6.0]])
B_SEC5 = np.array([0.0, 1.0])
AM_SEC5 = np.array([[0.0, 1.0], [-7.0, -10.0]])


@pytest.fixture(scope="session")
def cfg():
    return load_config("paper-sec5")


@pytest.fixture(scope="session")
def report(cfg):
    return build_design(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hurwitz(rng, n):
    a = rng.normal(size=(n, n))
    shift = np.abs(np.linalg.eigvals(a).real).max() + 0.5
    return a - shift * np.eye(n)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
