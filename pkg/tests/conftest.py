from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from fdepth.core import FunctionalSample, Grid, LabeledSample

FIXTURES = Path(__file__).parent / "fixtures"


def constants(levels, grid):
    """Constant curves at the given levels."""
    return FunctionalSample(grid, np.outer(np.asarray(levels, dtype=float), np.ones(len(grid))))


def labeled_constants(levels0, levels1, grid):
    values = np.outer(np.concatenate([levels0, levels1]).astype(float), np.ones(len(grid)))
    return LabeledSample(FunctionalSample(grid, values), np.repeat([0, 1], [len(levels0), len(levels1)]))


def random_sample(rng, n, m=51, scale=1.0):
    grid = Grid.linspace(0.0, 1.0, m)
    t = grid.points
    # smooth-ish random curves: random polynomial plus noise
    coef = rng.normal(size=(n, 3)) * scale
    values = coef[:, :1] + coef[:, 1:2] * t + coef[:, 2:] * t**2 + 0.3 * scale * rng.normal(size=(n, m))
    return FunctionalSample(grid, values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    return Grid.linspace(0.0, 1.0, 51)


@st.composite
def samples(draw, min_n=1, max_n=8, min_m=3, max_m=12):
    """Random functional samples with distinct rows on a random increasing grid."""
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(min_m, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    r = np.random.default_rng(seed)
    points = np.cumsum(r.uniform(0.1, 1.0, size=m))
    return FunctionalSample(Grid(points), r.normal(size=(n, m)))


# acceptance criteria report their outcome here; printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
