import numpy as np
import pytest
from hypothesis import settings

from bfinterface.model import builtin_convection, builtin_flux

settings.register_profile("repo", max_examples=1000, derandomize=True, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def pm():
    return builtin_flux("perona_malik")


@pytest.fixture
def pm_conv(pm):
    return builtin_convection("separable_linear", {"A": -1.0, "B": -1.0}, pm)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def canonical_result():
    """The canonical Perona-Malik run (n=2001, t_end=0.5), computed once per session."""
    from bfinterface.config import SimConfig
    from bfinterface.runner import run

    return run(SimConfig())


ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        fn = getattr(item, "obj", None)
        if getattr(fn, "is_hypothesis_test", False):
            item.add_marker(pytest.mark.invariant)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
