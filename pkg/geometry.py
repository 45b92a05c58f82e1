"""Half-disk geometry: support-to-angle mapping, sector tessellation, diameters."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from color import HclColor, ShadingContext, shade
from density import DensityGrid, Kind, SupportBounds
from errors import ParameterError

logger = logging.getLogger("hdds.geometry")

DEFAULT_K = 0.5
DEFAULT_D_BASE = 120.0


class Orientation(str, Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class Sector:
    theta_start: float
    theta_end: float
    fill: HclColor
    bin_index: int
    value: float

    def __post_init__(self):
        if not 0.0 <= self.theta_start < self.theta_end <= math.pi:
            raise ParameterError(f"bad sector angles ({self.theta_start}, {self.theta_end})")

    @property
    def extent(self) -> float:
        return self.theta_end - self.theta_start


@dataclass(frozen=True)
class HalfDiskStrip:
    """
    A half disk split into sectors, ordered by ascending angle.

    Angle 0 is the upper bound of the support and angle pi the lower bound,
    so values read left to right. `tick_angles` holds the bound labels and
    `mark_angles` any extra reference values.
    """

    diameter: float
    orientation: Orientation
    sectors: Tuple[Sector, ...]
    bounds: SupportBounds
    median_angle: Optional[float] = None
    tick_angles: Tuple[Tuple[float, str], ...] = ()
    mark_angles: Tuple[Tuple[float, str], ...] = ()

    def __post_init__(self):
        if not self.diameter > 0:
            raise ParameterError(f"diameter must be positive, got {self.diameter}")
        if not self.sectors:
            raise ParameterError("a strip needs at least one sector")
        if self.sectors[0].theta_start != 0.0 or self.sectors[-1].theta_end != math.pi:
            raise ParameterError("sectors must cover [0, pi]")
        for left, right in zip(self.sectors, self.sectors[1:]):
            if left.theta_end != right.theta_start:
                raise ParameterError("sectors must be contiguous")
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def radius(self) -> float:
        return self.diameter / 2.0

    def with_orientation(self, orientation: Orientation) -> "HalfDiskStrip":
        return replace(self, orientation=Orientation(orientation))


def map_support_to_angle(value: float, bounds: SupportBounds) -> float:
    if not bounds.contains(value):
        raise ParameterError(f"value {value} lies outside [{bounds.lo}, {bounds.hi}]")
    return math.pi * (bounds.hi - value) / (bounds.hi - bounds.lo)


def _label(value: float) -> str:
    return f"{value:g}"


def tessellate(
    grid: DensityGrid,
    ctx: ShadingContext,
    diameter: float,
    orientation: Orientation = Orientation.UP,
    marks: Sequence[float] = (),
) -> HalfDiskStrip:
    bounds = grid.bounds
    angles = math.pi * (bounds.hi - grid.edges) / (bounds.hi - bounds.lo)
    angles = np.array(angles)
    angles[0] = math.pi
    angles[-1] = 0.0

    sectors = tuple(
        Sector(float(angles[m + 1]), float(angles[m]), shade(float(grid.values[m]), ctx), m, float(grid.values[m]))
        for m in reversed(range(grid.n_bins))
    )

    median_angle = map_support_to_angle(grid.median, bounds) if bounds.contains(grid.median) else None
    if grid.kind is Kind.DISCRETE:
        lo_text, hi_text = _label(bounds.lo + 0.5), _label(bounds.hi - 0.5)
    else:
        lo_text, hi_text = _label(bounds.lo), _label(bounds.hi)
    mark_angles = tuple((map_support_to_angle(m, bounds), _label(m)) for m in marks if bounds.contains(m))
    if len(mark_angles) < len(marks):
        logger.debug("skipped %d marks outside the bounds", len(marks) - len(mark_angles))

    return HalfDiskStrip(
        diameter=float(diameter),
        orientation=orientation,
        sectors=sectors,
        bounds=bounds,
        median_angle=median_angle,
        tick_angles=((0.0, hi_text), (math.pi, lo_text)),
        mark_angles=mark_angles,
    )


def blank_strip(bounds: SupportBounds, fill: HclColor, diameter: float, orientation: Orientation) -> HalfDiskStrip:
    """Single-sector strip for cells drawn as an outline with dots only."""
    return HalfDiskStrip(
        diameter=float(diameter),
        orientation=orientation,
        sectors=(Sector(0.0, math.pi, fill, 0, 0.0),),
        bounds=bounds,
    )


def diameter_scale(p: float, k: float = DEFAULT_K, d_base: float = DEFAULT_D_BASE) -> float:
    """Diameter d_base * p**k; k=0.5 makes the half-disk area proportional to p."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k}")
    if not d_base > 0:
        raise ParameterError(f"d_base must be positive, got {d_base}")
    return d_base * p ** k
