"""
Univariate density estimation on a truncated support.

Continuous samples get a Gaussian kernel estimate evaluated at the bin
midpoints of an equal-width partition of the bounds, renormalized so the
Riemann sum over the bounds is 1. Discrete samples get relative frequencies
on unit-width bins centred on consecutive integers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy.stats import gaussian_kde

from errors import DataError, ParameterError, ReasonCode

logger = logging.getLogger("hdds.density")

DEFAULT_COVERAGE = 0.99
DEFAULT_BINS = 128


class Kind(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """Observed values of one variable. Immutable after construction."""

    values: np.ndarray
    kind: Kind = Kind.CONTINUOUS

    def __post_init__(self):
        values = _readonly(self.values)
        kind = Kind(self.kind)
        if values.size == 0:
            raise DataError("empty sample", ReasonCode.EMPTY_TARGET)
        if not np.all(np.isfinite(values)):
            raise ParameterError("sample contains NaN or infinite values")
        if kind is Kind.DISCRETE and not np.all(values == np.round(values)):
            raise ParameterError("discrete sample contains non-integer values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class SupportBounds:
    lo: float
    hi: float
    coverage: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError(f"bounds must be finite, got ({self.lo}, {self.hi})")
        if not 0.0 < self.coverage <= 1.0:
            raise ParameterError(f"coverage must lie in (0, 1], got {self.coverage}")
        if not self.lo < self.hi:
            raise DataError(
                f"degenerate support: lo={self.lo} is not below hi={self.hi}",
                ReasonCode.DEGENERATE_SUPPORT,
            )

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """
    A density evaluated over an ordered bin partition.

    Continuous grids hold density heights at the bin midpoints; discrete grids
    hold the probability mass of each integer (unit-width bins), together
    with the integer counts behind it.
    """

    kind: Kind
    edges: np.ndarray
    values: np.ndarray
    median: float
    n: int
    counts: Optional[np.ndarray] = None

    def __post_init__(self):
        edges = _readonly(self.edges)
        values = _readonly(self.values)
        if edges.size != values.size + 1:
            raise ParameterError("a grid needs exactly one more edge than values")
        if not np.all(np.diff(edges) > 0):
            raise ParameterError("grid edges must be strictly increasing")
        if np.any(values < 0):
            raise ParameterError("density values must be nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.counts is not None:
            counts = np.array(self.counts, dtype=np.int64)
            counts.setflags(write=False)
            object.__setattr__(self, "counts", counts)

    @property
    def n_bins(self) -> int:
        return int(self.values.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bounds(self) -> SupportBounds:
        return SupportBounds(float(self.edges[0]), float(self.edges[-1]))

    @property
    def modal_bin(self) -> int:
        return int(np.argmax(self.values))

    def mass(self) -> float:
        """Riemann sum of the values over the bins."""
        return float(np.sum(self.values * self.widths))

    def exact_masses(self) -> Tuple[Fraction, ...]:
        if self.counts is None:
            raise ParameterError("exact masses exist only for discrete grids")
        return tuple(Fraction(int(c), self.n) for c in self.counts)


def sample_median(sample: Sample) -> float:
    return float(np.median(sample.values))


def truncation_bounds(
    sample: Sample,
    coverage: float = DEFAULT_COVERAGE,
    lower_known: Optional[float] = None,
) -> SupportBounds:
    """
    Interval holding the central `coverage` share of the sample.

    With `lower_known` the support is half-bounded: the interval runs from
    the known lower bound to the empirical `coverage` quantile.
    """
    if not 0.0 < coverage <= 1.0:
        raise ParameterError(f"coverage must lie in (0, 1], got {coverage}")
    values = sample.values
    if lower_known is None:
        tail = (1.0 - coverage) / 2.0
        lo, hi = np.quantile(values, [tail, 1.0 - tail], method="linear")
        if coverage == 1.0:
            lo, hi = values.min(), values.max()
    else:
        lo = lower_known
        hi = np.quantile(values, coverage, method="linear")
    if not lo < hi:
        raise DataError(
            f"degenerate support: cannot truncate a sample to ({lo}, {hi})",
            ReasonCode.DEGENERATE_SUPPORT,
        )
    return SupportBounds(float(lo), float(hi), float(coverage))


def discrete_bounds(sample: Sample) -> SupportBounds:
    """Bounds spanning the unit bins of every integer from min to max."""
    return SupportBounds(float(sample.values.min()) - 0.5, float(sample.values.max()) + 0.5)


def display_bounds(
    sample: Sample,
    coverage: float = DEFAULT_COVERAGE,
    lower_known: Optional[float] = None,
) -> SupportBounds:
    if sample.kind is Kind.DISCRETE:
        return discrete_bounds(sample)
    return truncation_bounds(sample, coverage, lower_known)


def discrete_span(bounds: SupportBounds) -> SupportBounds:
    """Snap bounds to the unit bins of the integers they contain."""
    lo, hi = math.ceil(bounds.lo), math.floor(bounds.hi)
    if lo > hi:
        raise DataError(
            f"degenerate support: ({bounds.lo:g}, {bounds.hi:g}) contains no integer",
            ReasonCode.DEGENERATE_SUPPORT,
        )
    return SupportBounds(lo - 0.5, hi + 0.5, bounds.coverage)


def resolve_bounds(
    sample: Sample,
    explicit: Optional[SupportBounds] = None,
    coverage: float = DEFAULT_COVERAGE,
    lower_known: Optional[float] = None,
) -> SupportBounds:
    """Explicit bounds when given (snapped to unit bins for discrete samples), else display bounds."""
    if explicit is None:
        return display_bounds(sample, coverage, lower_known)
    if sample.kind is Kind.DISCRETE:
        return discrete_span(explicit)
    return explicit


def _kernel_heights(
    values: np.ndarray, points: np.ndarray, bandwidth: Optional[float], fallback: float
) -> np.ndarray:
    spread = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    if spread > 0:
        # scipy scales its bandwidth factor by the sample standard deviation
        bw_method = "silverman" if bandwidth is None else bandwidth / spread
        return gaussian_kde(values, bw_method=bw_method)(points)

    h = bandwidth or fallback
    logger.debug("zero-spread sample of %d values, direct kernel sum with h=%g", values.size, h)
    z = (points[:, None] - values[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (values.size * h * math.sqrt(2.0 * math.pi))


def estimate_continuous(
    sample: Sample,
    bounds: SupportBounds,
    n_bins: int = DEFAULT_BINS,
    bandwidth: Optional[float] = None,
) -> DensityGrid:
    if sample.kind is not Kind.CONTINUOUS:
        raise ParameterError("estimate_continuous needs a continuous sample")
    if n_bins < 2:
        raise ParameterError(f"n_bins must be at least 2, got {n_bins}")
    if bandwidth is not None and not bandwidth > 0:
        raise ParameterError(f"bandwidth must be positive, got {bandwidth}")

    edges = np.linspace(bounds.lo, bounds.hi, n_bins + 1)
    midpoints = 0.5 * (edges[:-1] + edges[1:])
    width = bounds.width / n_bins

    heights = _kernel_heights(sample.values, midpoints, bandwidth, width)
    mass = float(heights.sum()) * width
    if not (math.isfinite(mass) and mass > 0):
        raise DataError(
            f"degenerate density: no estimated mass inside ({bounds.lo:g}, {bounds.hi:g})",
            ReasonCode.DEGENERATE_DENSITY,
        )
    logger.debug("kde n=%d bins=%d mass inside bounds before renormalization=%.6f", sample.n, n_bins, mass)

    return DensityGrid(
        kind=Kind.CONTINUOUS,
        edges=edges,
        values=heights / mass,
        median=sample_median(sample),
        n=sample.n,
    )


def estimate_discrete(sample: Sample, support: Optional[SupportBounds] = None) -> DensityGrid:
    """
    Relative frequencies on one bin per integer from min to max.

    With `support` the bins are exactly the integers inside it: unobserved
    ones get zero mass, and records outside it are truncated so the masses
    of the kept records sum to 1.
    """
    if sample.kind is not Kind.DISCRETE:
        raise ParameterError("estimate_discrete needs a discrete sample")
    ints = sample.values.astype(np.int64)
    if support is None:
        lo, hi = int(ints.min()), int(ints.max())
    else:
        span = discrete_span(support)
        lo, hi = int(span.lo + 0.5), int(span.hi - 0.5)

    kept = ints[(ints >= lo) & (ints <= hi)]
    if kept.size == 0:
        raise DataError(
            f"degenerate density: no record inside ({lo - 0.5:g}, {hi + 0.5:g})",
            ReasonCode.DEGENERATE_DENSITY,
        )
    if kept.size < ints.size:
        logger.info("%d of %d records lie outside [%d, %d] and are truncated", ints.size - kept.size, ints.size, lo, hi)

    counts = np.bincount(kept - lo, minlength=hi - lo + 1)
    edges = np.arange(lo, hi + 2, dtype=float) - 0.5
    return DensityGrid(
        kind=Kind.DISCRETE,
        edges=edges,
        values=counts / kept.size,
        median=float(np.median(kept)),
        n=int(kept.size),
        counts=counts,
    )


def estimate(
    sample: Sample,
    bounds: SupportBounds,
    n_bins: int = DEFAULT_BINS,
    bandwidth: Optional[float] = None,
) -> DensityGrid:
    if sample.kind is Kind.DISCRETE:
        return estimate_discrete(sample, support=bounds)
    return estimate_continuous(sample, bounds, n_bins, bandwidth)
