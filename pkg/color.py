"""HCL shading of density values and conversion to sRGB."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from density import DensityGrid
from errors import DataError, ParameterError, ReasonCode

logger = logging.getLogger("hdds.color")

DEFAULT_GAMMA = 1.0

# D65 reference white and the XYZ -> linear sRGB matrix
_WHITE_D65 = (95.047, 100.0, 108.883)
_XYZ_TO_LINEAR_RGB = np.array(
    [
        [3.2404542, -1.5371385, -0.4985314],
        [-0.9692660, 1.8760108, 0.0415560],
        [0.0556434, -0.2040259, 1.0572252],
    ]
)
_KAPPA = 24389.0 / 27.0


@dataclass(frozen=True)
class HclColor:
    hue: float
    chroma: float
    luminance: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.hue, self.chroma, self.luminance)):
            raise ParameterError("HCL components must be finite")
        if self.chroma < 0:
            raise ParameterError(f"chroma must be nonnegative, got {self.chroma}")
        if not 0.0 <= self.luminance <= 100.0:
            raise ParameterError(f"luminance must lie in [0, 100], got {self.luminance}")
        object.__setattr__(self, "hue", float(self.hue) % 360.0)

    def grayscale(self) -> "HclColor":
        return HclColor(self.hue, 0.0, self.luminance)

    @classmethod
    def parse(cls, text: str) -> "HclColor":
        """Parse 'hue,chroma,luminance'."""
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 3:
            raise ParameterError(f"expected 'hue,chroma,luminance', got {text!r}")
        try:
            hue, chroma, luminance = (float(p) for p in parts)
        except ValueError as exc:
            raise ParameterError(f"non-numeric HCL component in {text!r}") from exc
        return cls(hue, chroma, luminance)


@dataclass(frozen=True)
class RgbColor:
    r: float
    g: float
    b: float

    def __post_init__(self):
        for name in ("r", "g", "b"):
            object.__setattr__(self, name, min(max(float(getattr(self, name)), 0.0), 1.0))

    def hex(self) -> str:
        return "#%02X%02X%02X" % tuple(int(round(c * 255)) for c in (self.r, self.g, self.b))


DEFAULT_BASE = HclColor(10.0, 90.0, 30.0)
DEFAULT_BASE_2 = HclColor(250.0, 90.0, 30.0)


@dataclass(frozen=True)
class ShadingContext:
    """Base color, gamma and the density value that maps to full saturation."""

    base: HclColor
    gamma: float
    norm: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.norm) and self.norm > 0):
            raise DataError(f"degenerate context: norm={self.norm}", ReasonCode.DEGENERATE_CONTEXT)

    @property
    def white(self) -> HclColor:
        return HclColor(self.base.hue, 0.0, 100.0)


def make_context(
    grids: Iterable[DensityGrid],
    base: HclColor = DEFAULT_BASE,
    gamma: float = DEFAULT_GAMMA,
) -> ShadingContext:
    """Shading context whose norm is the largest value over every grid."""
    grids = list(grids)
    if not grids:
        raise ParameterError("a shading context needs at least one grid")
    norm = max(float(np.max(g.values)) for g in grids)
    if not norm > 0:
        raise DataError("degenerate context: every grid is identically zero", ReasonCode.DEGENERATE_CONTEXT)
    logger.debug("context over %d grids, norm=%.6g gamma=%g", len(grids), norm, gamma)
    return ShadingContext(base=base, gamma=float(gamma), norm=norm)


def mixing_weight(f_value: float, ctx: ShadingContext) -> float:
    if not f_value >= 0:
        raise ParameterError(f"density value must be nonnegative, got {f_value}")
    p = min(f_value / ctx.norm, 1.0)
    return p ** ctx.gamma


def shade(f_value: float, ctx: ShadingContext) -> HclColor:
    """Mix the base color with white; the base hue is kept throughout."""
    w = mixing_weight(f_value, ctx)
    base = ctx.base
    return HclColor(
        base.hue,
        w * base.chroma,
        w * base.luminance + (1.0 - w) * 100.0,
    )


def _luminance_to_y(luminance: float) -> float:
    if luminance > 8.0:
        return ((luminance + 16.0) / 116.0) ** 3
    return luminance / _KAPPA


def _gamma_encode(linear: np.ndarray) -> np.ndarray:
    linear = np.clip(linear, 0.0, None)
    return np.where(
        linear <= 0.0031308,
        12.92 * linear,
        1.055 * np.power(linear, 1.0 / 2.4) - 0.055,
    )


def hcl_to_rgb(color: HclColor) -> RgbColor:
    """Polar LUV (D65) to gamma-encoded sRGB, clamped to the gamut."""
    y = _luminance_to_y(color.luminance)
    if color.chroma == 0 or color.luminance == 0:
        linear = np.full(3, y)
    else:
        xn, yn, zn = _WHITE_D65
        denom = xn + 15.0 * yn + 3.0 * zn
        h = math.radians(color.hue)
        u = color.chroma * math.cos(h)
        v = color.chroma * math.sin(h)
        u_p = u / (13.0 * color.luminance) + 4.0 * xn / denom
        v_p = max(v / (13.0 * color.luminance) + 9.0 * yn / denom, np.finfo(float).tiny)
        x = y * 9.0 * u_p / (4.0 * v_p)
        z = y * (12.0 - 3.0 * u_p - 20.0 * v_p) / (4.0 * v_p)
        linear = _XYZ_TO_LINEAR_RGB @ np.array([x, y, z])
    r, g, b = np.clip(_gamma_encode(linear), 0.0, 1.0)
    return RgbColor(float(r), float(g), float(b))


def total_ink(grid: DensityGrid, ctx: ShadingContext) -> float:
    """Darkness (1 - L/100) integrated over the bins of a grid."""
    darkness = np.array([1.0 - shade(float(v), ctx).luminance / 100.0 for v in grid.values])
    return float(np.sum(darkness * grid.widths))
