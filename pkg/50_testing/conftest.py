import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

FIXTURES = Path(__file__).resolve().parent / "fixtures"

from density import Kind, Sample  # noqa: E402
from table import ConditioningColumn, Dataset  # noqa: E402

# Flat reference for uniform data: the kernel has no boundary correction, so
# half a bin must span about two bandwidths for the outer bins to stay level.
FLAT_BANDWIDTH = 0.008
FLAT_BINS = 64


def stratified_uniform(n: int, lo: float, hi: float, rng) -> Sample:
    """One uniform draw per 1/n slice of (lo, hi)."""
    return Sample(lo + (hi - lo) * (np.arange(n) + rng.random(n)) / n)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def mixture_sample(rng) -> Sample:
    """1,600 draws from 0.5 N(-1.5, 1) + 0.5 N(1.5, 1)."""
    component = rng.random(1600) < 0.5
    values = np.where(component, rng.normal(-1.5, 1.0, 1600), rng.normal(1.5, 1.0, 1600))
    return Sample(values, Kind.CONTINUOUS)


def make_dataset(target, x_labels, y_labels=None, kind=Kind.CONTINUOUS, label="") -> Dataset:
    cond_x = ConditioningColumn.from_labels("x", x_labels)
    cond_y = ConditioningColumn.from_labels("y", y_labels) if y_labels is not None else None
    return Dataset(Sample(target, kind), cond_x, cond_y, source_label=label)


@pytest.fixture
def independent_dataset(rng) -> Dataset:
    """x independent of y, target shifted by both."""
    n = 20000
    x = rng.choice(["a", "b"], size=n, p=[0.3, 0.7])
    y = rng.choice(["u", "v", "w"], size=n, p=[0.5, 0.3, 0.2])
    z = rng.normal(0.0, 1.0, n) + (x == "b") * 1.0 - (y == "w") * 0.5
    return make_dataset(z, list(x), list(y))
