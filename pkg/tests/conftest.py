import numpy as np
import pytest

from dynclear.network import DynamicInstance, StaticInstance

import _reference


@pytest.fixture
def nominal():
    return StaticInstance(_reference.PBAR, _reference.C_NOM, _reference.EXTERNAL)


@pytest.fixture
def shocked():
    return StaticInstance(_reference.PBAR, _reference.C_SHOCK, _reference.EXTERNAL)


@pytest.fixture
def stream():
    return DynamicInstance(_reference.PBAR, _reference.STREAM, _reference.ALPHA, 0.0, _reference.EXTERNAL)


@pytest.fixture
def chain():
    return DynamicInstance(_reference.CHAIN_PBAR, _reference.CHAIN_INFLOWS, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
