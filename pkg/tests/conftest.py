import numpy as np
import pytest

from shadowgrowth.core import HeightField

ACCEPTANCE_LINES = []


def random_field(rng, L, kind="gauss", scale=5.0, dx=1.0):
    if kind == "gauss":
        h = rng.normal(size=L) * scale
    elif kind == "walk":
        h = np.cumsum(rng.normal(size=L)) * scale / 3
    elif kind == "int":
        h = rng.integers(0, int(scale) + 1, size=L).astype(float)
    else:
        raise ValueError(kind)
    return HeightField(h, dx)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
