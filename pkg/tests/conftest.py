import sys
import numpy as np
import pytest

from mbcr.codec import CodeParams
from mbcr.gf import GF2, get_field


@pytest.fixture
def five_node_gf2():
    """n=5, k=d=3, r=2 over GF(2) with the fixed 3x4 generator."""
    return CodeParams.family(3, 2, GF2, "builtin-paper-gf2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gf256():
    return get_field(8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
