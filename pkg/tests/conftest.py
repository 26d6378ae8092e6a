import numpy as np
import pytest

from rlnc_resilience.gf256 import gf_add, gf_mul


def clmul_mod(a, b, poly=0x11D):
    """Reference product: carry-less multiply, then long division by ``poly``."""
    prod = 0
    for i in range(8):
        if (b >> i) & 1:
            prod ^= a << i
    for bit in range(14, 7, -1):
        if (prod >> bit) & 1:
            prod ^= poly << (bit - 8)
    return prod


@pytest.fixture(scope="session")
def mul_table():
    return np.array([[gf_mul(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)


@pytest.fixture(scope="session")
def add_table():
    return np.array([[gf_add(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":").split(".")[0].rstrip("abc"))):
            terminalreporter.write_line(line)
