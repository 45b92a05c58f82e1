"""
SVG rendering for half-disk density strips.

Elements are small frozen dataclasses that know how to print themselves;
a FigureDoc is an ordered list of them. Every number is printed with four
decimals, so identical inputs and seed give identical bytes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from color import ShadingContext, hcl_to_rgb, shade
from density import DensityGrid, Kind, Sample
from errors import ParameterError
from geometry import HalfDiskStrip, Orientation, blank_strip

logger = logging.getLogger("hdds.render")

DOT_RADIAL_RANGE = (0.20, 0.90)
DOT_JITTER_FRACTION = 0.35
# dots stay off the diameter line
DOT_EDGE_INSET = 1e-3
SEAM_WIDTH = 0.25
MEDIAN_TICK_FRACTION = 0.10
MARK_TICK_FRACTION = 0.06
DEFAULT_MARKER_RADIUS = 1.2
DEFAULT_FONT_SIZE = 10.0

FIGURE_MARGIN = 24.0
CELL_PAD = 16.0
BLACK = "#000000"
GRID_GRAY = "#999999"
MARK_RED = "#D7191C"


def _num(value: float) -> str:
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _polar(cx: float, cy: float, radius: float, theta: float, flip: bool) -> Tuple[float, float]:
    dy = radius * math.sin(theta)
    return cx + radius * math.cos(theta), (cy + dy if flip else cy - dy)


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectorPath:
    """Circular sector: two radii and one arc. `flip` draws below the diameter."""

    cx: float
    cy: float
    radius: float
    theta_start: float
    theta_end: float
    fill: str
    flip: bool = False
    stroke: Optional[str] = None
    stroke_width: float = SEAM_WIDTH

    def to_svg(self) -> str:
        x0, y0 = _polar(self.cx, self.cy, self.radius, self.theta_start, self.flip)
        x1, y1 = _polar(self.cx, self.cy, self.radius, self.theta_end, self.flip)
        r = _num(self.radius)
        sweep = 1 if self.flip else 0
        d = (
            f"M {_num(self.cx)} {_num(self.cy)} L {_num(x0)} {_num(y0)} "
            f"A {r} {r} 0 0 {sweep} {_num(x1)} {_num(y1)} Z"
        )
        # same-colour hairline stroke hides seams between neighbours
        stroke = self.stroke or self.fill
        return f'<path d="{d}" fill="{self.fill}" stroke="{stroke}" stroke-width="{_num(self.stroke_width)}"/>'

    def scaled(self, factor: float) -> "SectorPath":
        return replace(
            self,
            cx=self.cx * factor,
            cy=self.cy * factor,
            radius=self.radius * factor,
            stroke_width=self.stroke_width * factor,
        )


@dataclass(frozen=True)
class Line:
    x1: float
    y1: float
    x2: float
    y2: float
    stroke: str = BLACK
    width: float = 1.0

    def to_svg(self) -> str:
        return (
            f'<line x1="{_num(self.x1)}" y1="{_num(self.y1)}" x2="{_num(self.x2)}" y2="{_num(self.y2)}" '
            f'stroke="{self.stroke}" stroke-width="{_num(self.width)}"/>'
        )

    def scaled(self, factor: float) -> "Line":
        return replace(
            self,
            x1=self.x1 * factor,
            y1=self.y1 * factor,
            x2=self.x2 * factor,
            y2=self.y2 * factor,
            width=self.width * factor,
        )


@dataclass(frozen=True)
class Marker:
    cx: float
    cy: float
    r: float
    fill: str = BLACK

    def to_svg(self) -> str:
        return f'<circle cx="{_num(self.cx)}" cy="{_num(self.cy)}" r="{_num(self.r)}" fill="{self.fill}"/>'

    def scaled(self, factor: float) -> "Marker":
        return replace(self, cx=self.cx * factor, cy=self.cy * factor, r=self.r * factor)


@dataclass(frozen=True)
class Label:
    x: float
    y: float
    text: str
    size: float = DEFAULT_FONT_SIZE
    anchor: str = "middle"
    fill: str = BLACK

    def to_svg(self) -> str:
        return (
            f'<text x="{_num(self.x)}" y="{_num(self.y)}" font-family="sans-serif" '
            f'font-size="{_num(self.size)}" text-anchor={quoteattr(self.anchor)} fill="{self.fill}">'
            f"{escape(self.text)}</text>"
        )

    def scaled(self, factor: float) -> "Label":
        return replace(self, x=self.x * factor, y=self.y * factor, size=self.size * factor)


@dataclass(frozen=True)
class Box:
    x: float
    y: float
    width: float
    height: float
    fill: str
    stroke: Optional[str] = None
    stroke_width: float = SEAM_WIDTH

    def to_svg(self) -> str:
        stroke = self.stroke or self.fill
        return (
            f'<rect x="{_num(self.x)}" y="{_num(self.y)}" width="{_num(self.width)}" '
            f'height="{_num(self.height)}" fill="{self.fill}" stroke="{stroke}" '
            f'stroke-width="{_num(self.stroke_width)}"/>'
        )

    def scaled(self, factor: float) -> "Box":
        return replace(
            self,
            x=self.x * factor,
            y=self.y * factor,
            width=self.width * factor,
            height=self.height * factor,
            stroke_width=self.stroke_width * factor,
        )


Element = Union[SectorPath, Line, Marker, Label, Box]


@dataclass
class FigureDoc:
    width: float
    height: float
    elements: List[Element] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ParameterError(f"figure size must be positive, got {self.width}x{self.height}")

    def add(self, *elements: Element) -> None:
        self.elements.extend(elements)

    def extend(self, elements: Sequence[Element]) -> None:
        self.elements.extend(elements)

    def scaled(self, factor: float) -> "FigureDoc":
        if not factor > 0:
            raise ParameterError(f"scale factor must be positive, got {factor}")
        return FigureDoc(
            self.width * factor,
            self.height * factor,
            [el.scaled(factor) for el in self.elements],
            self.seed,
        )


@dataclass(frozen=True)
class DotOverlay:
    """Data dots in strip coordinates: (angle, radial fraction) pairs."""

    positions: Tuple[Tuple[float, float], ...]
    marker_radius: float = DEFAULT_MARKER_RADIUS
    dropped: int = 0


@dataclass(frozen=True)
class RenderOptions:
    show_median: bool = False
    show_bounds: bool = True
    show_dots: bool = False
    font_size: float = DEFAULT_FONT_SIZE
    marker_radius: float = DEFAULT_MARKER_RADIUS
    median_width: float = 1.0
    title: str = ""


# ---------------------------------------------------------------------------
# fragments
# ---------------------------------------------------------------------------


def _bound_labels(strip: HalfDiskStrip, cx: float, cy: float, opts: RenderOptions) -> List[Element]:
    flip = strip.orientation is Orientation.DOWN
    dy = -0.5 * opts.font_size if flip else 1.2 * opts.font_size
    out: List[Element] = []
    for angle, text in strip.tick_angles:
        x, _ = _polar(cx, cy, strip.radius, angle, flip)
        out.append(Label(x, cy + dy, text, opts.font_size))
    return out


def _mark_ticks(strip: HalfDiskStrip, cx: float, cy: float, opts: RenderOptions) -> List[Element]:
    flip = strip.orientation is Orientation.DOWN
    r = strip.radius
    out: List[Element] = []
    for angle, text in strip.mark_angles:
        x0, y0 = _polar(cx, cy, r, angle, flip)
        x1, y1 = _polar(cx, cy, r * (1.0 + MARK_TICK_FRACTION), angle, flip)
        out.append(Line(x0, y0, x1, y1, stroke=MARK_RED, width=1.5))
        lx, ly = _polar(cx, cy, r * (1.0 + 2.5 * MARK_TICK_FRACTION) + 0.3 * opts.font_size, angle, flip)
        out.append(Label(lx, ly + 0.35 * opts.font_size, text, 0.9 * opts.font_size, fill=MARK_RED))
    return out


def render_strip(
    strip: HalfDiskStrip,
    cx: float,
    cy: float,
    opts: RenderOptions = RenderOptions(),
    outline: Optional[str] = None,
) -> List[Element]:
    """Sector paths, then the median tick, then bound labels and marks."""
    flip = strip.orientation is Orientation.DOWN
    r = strip.radius
    elements: List[Element] = [
        SectorPath(cx, cy, r, s.theta_start, s.theta_end, hcl_to_rgb(s.fill).hex(), flip, outline)
        for s in strip.sectors
    ]
    if opts.show_median and strip.median_angle is not None:
        x0, y0 = _polar(cx, cy, r * (1.0 - MEDIAN_TICK_FRACTION), strip.median_angle, flip)
        x1, y1 = _polar(cx, cy, r, strip.median_angle, flip)
        elements.append(Line(x0, y0, x1, y1, stroke=BLACK, width=opts.median_width))
    if opts.show_bounds:
        elements.extend(_bound_labels(strip, cx, cy, opts))
    elements.extend(_mark_ticks(strip, cx, cy, opts))
    return elements


def render_disk_pair(
    top: HalfDiskStrip,
    bottom: HalfDiskStrip,
    cx: float,
    cy: float,
    opts: RenderOptions = RenderOptions(),
) -> List[Element]:
    """Two strips sharing a centre and a horizontal diameter line."""
    if top.orientation is not Orientation.UP or bottom.orientation is not Orientation.DOWN:
        raise ParameterError("a disk pair needs an up strip on top and a down strip below")
    inner = replace(opts, show_bounds=False)
    elements = render_strip(top, cx, cy, inner) + render_strip(bottom, cx, cy, inner)
    half = max(top.radius, bottom.radius)
    elements.append(Line(cx - half, cy, cx + half, cy, stroke=BLACK, width=0.5))
    if opts.show_bounds:
        (_, hi_text), (_, lo_text) = top.tick_angles
        pad = 0.4 * opts.font_size
        elements.append(Label(cx - half - pad, cy + 0.35 * opts.font_size, lo_text, opts.font_size, anchor="end"))
        elements.append(Label(cx + half + pad, cy + 0.35 * opts.font_size, hi_text, opts.font_size, anchor="start"))
    return elements


def render_dots(
    sample: Sample,
    strip: HalfDiskStrip,
    seed: int,
    marker_radius: float = DEFAULT_MARKER_RADIUS,
) -> DotOverlay:
    """
    Place one dot per data point.

    Continuous values sit at their mapped angle, pulled in by DOT_EDGE_INSET
    at the two bounds; discrete values get an angular jitter of up to 35% of
    one bin so repeated integers spread out.
    Radial fractions are uniform on [0.20, 0.90]. All draws come from `seed`.
    """
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")
    lo, hi = strip.bounds.lo, strip.bounds.hi
    values = sample.values
    kept = values[(values >= lo) & (values <= hi)]
    dropped = int(values.size - kept.size)
    if dropped:
        logger.warning("%d of %d points lie outside [%g, %g] and are not drawn", dropped, values.size, lo, hi)

    rng = np.random.default_rng(seed)
    angles = math.pi * (hi - kept) / (hi - lo)
    if sample.kind is Kind.DISCRETE:
        bin_extent = math.pi / (hi - lo)
        angles = angles + rng.uniform(-DOT_JITTER_FRACTION, DOT_JITTER_FRACTION, size=kept.size) * bin_extent
    angles = np.clip(angles, DOT_EDGE_INSET, math.pi - DOT_EDGE_INSET)
    fractions = rng.uniform(*DOT_RADIAL_RANGE, size=kept.size)

    positions = tuple((float(a), float(f)) for a, f in zip(angles, fractions))
    return DotOverlay(positions=positions, marker_radius=marker_radius, dropped=dropped)


def overlay_elements(overlay: DotOverlay, strip: HalfDiskStrip, cx: float, cy: float) -> List[Element]:
    flip = strip.orientation is Orientation.DOWN
    out: List[Element] = []
    for angle, fraction in overlay.positions:
        x, y = _polar(cx, cy, fraction * strip.radius, angle, flip)
        out.append(Marker(x, y, overlay.marker_radius))
    return out


def render_density_strip(
    grid: DensityGrid,
    ctx: ShadingContext,
    x: float,
    y: float,
    length: float,
    thickness: float,
) -> List[Element]:
    """Rectangular density strip: one shaded box per bin, lower bound on the left."""
    lo, span = grid.bounds.lo, grid.bounds.width
    out: List[Element] = []
    for m in range(grid.n_bins):
        left = x + length * (grid.edges[m] - lo) / span
        right = x + length * (grid.edges[m + 1] - lo) / span
        out.append(Box(left, y, right - left, thickness, hcl_to_rgb(shade(float(grid.values[m]), ctx)).hex()))
    return out


# ---------------------------------------------------------------------------
# figure layouts
# ---------------------------------------------------------------------------


def _background(width: float, height: float) -> Box:
    return Box(0.0, 0.0, width, height, "#FFFFFF")


def _title_band(opts: RenderOptions) -> float:
    return 2.0 * opts.font_size if opts.title else 0.0


def _add_title(doc: FigureDoc, opts: RenderOptions) -> None:
    if opts.title:
        doc.add(Label(doc.width / 2.0, FIGURE_MARGIN / 2.0 + opts.font_size, opts.title, 1.2 * opts.font_size))


def strip_figure(
    strip: HalfDiskStrip,
    opts: RenderOptions = RenderOptions(),
    overlay: Optional[DotOverlay] = None,
    density_strip: Optional[Tuple[DensityGrid, ShadingContext]] = None,
    seed: int = 0,
) -> FigureDoc:
    """One strip, optionally with dots and a rectangular strip of length r below it."""
    r = strip.radius
    ds_thickness = max(8.0, 0.08 * strip.diameter)
    label_band = 2.5 * opts.font_size
    ds_band = (ds_thickness + opts.font_size) if density_strip else 0.0
    top = FIGURE_MARGIN + _title_band(opts)
    width = strip.diameter + 2.0 * FIGURE_MARGIN
    height = top + r + label_band + ds_band + FIGURE_MARGIN

    doc = FigureDoc(width, height, [_background(width, height)], seed)
    _add_title(doc, opts)
    cx, cy = width / 2.0, top + r
    if strip.orientation is Orientation.DOWN:
        cy = top
    doc.extend(render_strip(strip, cx, cy, opts))
    if overlay is not None:
        doc.extend(overlay_elements(overlay, strip, cx, cy))
    if density_strip is not None:
        grid, ctx = density_strip
        doc.extend(render_density_strip(grid, ctx, cx - r / 2.0, top + r + label_band, r, ds_thickness))
    return doc


def pair_figure(
    top: HalfDiskStrip,
    bottom: HalfDiskStrip,
    opts: RenderOptions = RenderOptions(),
    overlays: Tuple[Optional[DotOverlay], Optional[DotOverlay]] = (None, None),
    labels: Tuple[str, str] = ("", ""),
    seed: int = 0,
) -> FigureDoc:
    half = max(top.radius, bottom.radius)
    side = 4.0 * opts.font_size
    legend = 2.0 * opts.font_size if any(labels) else 0.0
    head = FIGURE_MARGIN + _title_band(opts)
    width = 2.0 * half + 2.0 * (FIGURE_MARGIN + side)
    height = head + 2.0 * half + legend + FIGURE_MARGIN

    doc = FigureDoc(width, height, [_background(width, height)], seed)
    _add_title(doc, opts)
    cx, cy = width / 2.0, head + half
    doc.extend(render_disk_pair(top, bottom, cx, cy, opts))
    for overlay, strip in zip(overlays, (top, bottom)):
        if overlay is not None:
            doc.extend(overlay_elements(overlay, strip, cx, cy))
    if legend:
        entries = zip(labels, (_darkest_hex(top.sectors), _darkest_hex(bottom.sectors)))
        doc.extend(_legend(entries, FIGURE_MARGIN, head + 2.0 * half + opts.font_size, opts))
    return doc


def _darkest_hex(sectors) -> str:
    darkest = min(sectors, key=lambda s: s.fill.luminance)
    return hcl_to_rgb(darkest.fill).hex()


def _legend(entries, x: float, y: float, opts: RenderOptions) -> List[Element]:
    """Colour swatch and text per (label, fill) entry, left to right."""
    out: List[Element] = []
    size = opts.font_size
    for text, fill in entries:
        if not text:
            continue
        out.append(Box(x, y, size, size, fill))
        out.append(Label(x + 1.4 * size, y + 0.85 * size, text, size, anchor="start"))
        x += 1.4 * size + 0.6 * size * len(text) + size
    return out


def _grid_frame(n_rows: int, n_cols: int, row_labels, col_labels, cell_w, cell_h, opts, corner_gap=True):
    """Header/row label extents and the element list for labels and margin separators."""
    size = opts.font_size
    label_w = max(3.0 * size, 0.6 * size * max(len(t) for t in row_labels) + size)
    head_h = 2.5 * size
    x0 = FIGURE_MARGIN + label_w
    y0 = FIGURE_MARGIN + _title_band(opts) + head_h
    out: List[Element] = []
    for j, text in enumerate(col_labels):
        out.append(Label(x0 + (j + 0.5) * cell_w, y0 - 0.8 * size, text, size))
    for i, text in enumerate(row_labels):
        out.append(Label(x0 - 0.5 * size, y0 + (i + 0.5) * cell_h + 0.35 * size, text, size, anchor="end"))
    if corner_gap and n_cols > 1:
        x = x0 + (n_cols - 1) * cell_w
        out.append(Line(x, y0, x, y0 + n_rows * cell_h, stroke=GRID_GRAY, width=0.75))
    if corner_gap and n_rows > 1:
        y = y0 + (n_rows - 1) * cell_h
        out.append(Line(x0, y, x0 + n_cols * cell_w, y, stroke=GRID_GRAY, width=0.75))
    width = x0 + n_cols * cell_w + FIGURE_MARGIN
    height = y0 + n_rows * cell_h + FIGURE_MARGIN
    return x0, y0, width, height, out


def _cell_elements(cell, table, cx, cy, orientation, opts, seed, show_bounds) -> List[Element]:
    """Shaded strip, sparse outline with dots, or an empty-slot label."""
    cell_opts = replace(opts, show_bounds=show_bounds)
    if cell.grid is not None:
        strip = table.strip(cell.row, cell.col, orientation)
        out = render_strip(strip, cx, cy, cell_opts)
        if opts.show_dots and cell.sample is not None:
            overlay = render_dots(cell.sample, strip, seed, opts.marker_radius)
            out.extend(overlay_elements(overlay, strip, cx, cy))
        return out
    if cell.sample is not None and cell.diameter > 0:
        strip = blank_strip(table.bounds, table.ctx.white, cell.diameter, orientation)
        out = render_strip(strip, cx, cy, replace(cell_opts, show_median=False), outline=GRID_GRAY)
        overlay = render_dots(cell.sample, strip, seed, opts.marker_radius)
        return out + overlay_elements(overlay, strip, cx, cy)
    dy = -0.5 * opts.font_size if orientation is Orientation.UP else opts.font_size
    return [Label(cx, cy + dy, "n = 0", 0.9 * opts.font_size, fill=GRID_GRAY)]


def table_figure(table, opts: RenderOptions = RenderOptions(), seed: int = 0) -> FigureDoc:
    """
    Lay out an HDDS table: one half disk per cell, sitting on the cell's
    baseline, row labels on the left and column labels on top. The last
    row and column hold the margins, separated by thin gray lines.
    """
    size = opts.font_size
    cell_w = table.d_base + CELL_PAD
    cell_h = table.d_base / 2.0 + CELL_PAD + 1.5 * size
    x0, y0, width, height, frame = _grid_frame(
        table.n_rows, table.n_cols, table.row_labels, table.col_labels, cell_w, cell_h, opts
    )
    doc = FigureDoc(width, height, [_background(width, height)], seed)
    _add_title(doc, opts)
    doc.extend(frame)
    for i in range(table.n_rows):
        for j in range(table.n_cols):
            cell = table.cell(i, j)
            cx = x0 + (j + 0.5) * cell_w
            cy = y0 + (i + 1) * cell_h - CELL_PAD / 2.0 - 1.5 * size
            corner = i == table.n_rows - 1 and j == table.n_cols - 1
            doc.extend(
                _cell_elements(cell, table, cx, cy, Orientation.UP, opts,
                               seed + i * table.n_cols + j, opts.show_bounds and corner)
            )
    return doc


def comparison_figure(comparison, opts: RenderOptions = RenderOptions(), seed: int = 0) -> FigureDoc:
    """Disk pairs per cell: first source on top, second source mirrored below."""
    top, bottom = comparison.top, comparison.bottom
    size = opts.font_size
    cell_w = top.d_base + CELL_PAD
    cell_h = top.d_base + CELL_PAD
    legend = 2.0 * size
    x0, y0, width, height, frame = _grid_frame(
        top.n_rows, top.n_cols, top.row_labels, top.col_labels, cell_w, cell_h, opts
    )
    height += legend
    doc = FigureDoc(width, height, [_background(width, height)], seed)
    _add_title(doc, opts)
    doc.extend(frame)
    n_cells = top.n_rows * top.n_cols
    for i in range(top.n_rows):
        for j in range(top.n_cols):
            cx = x0 + (j + 0.5) * cell_w
            cy = y0 + (i + 0.5) * cell_h
            index = i * top.n_cols + j
            a_cell, b_cell = top.cell(i, j), bottom.cell(i, j)
            doc.extend(_cell_elements(a_cell, top, cx, cy, Orientation.UP, opts, seed + index, False))
            doc.extend(_cell_elements(b_cell, bottom, cx, cy, Orientation.DOWN, opts, seed + n_cells + index, False))
            half = max(a_cell.diameter, b_cell.diameter) / 2.0
            if half > 0:
                doc.add(Line(cx - half, cy, cx + half, cy, stroke=BLACK, width=0.5))
    entries = (
        (top.source_label, hcl_to_rgb(top.ctx.base).hex()),
        (bottom.source_label, hcl_to_rgb(bottom.ctx.base).hex()),
    )
    y = height - FIGURE_MARGIN - legend + 0.5 * size
    doc.extend(_legend(entries, FIGURE_MARGIN, y, opts))
    span = comparison.bounds
    doc.add(Label(width - FIGURE_MARGIN, y + 0.85 * size, f"support [{span.lo:g}, {span.hi:g}]", size, anchor="end"))
    return doc


def serialize(doc: FigureDoc) -> bytes:
    """SVG 1.1, UTF-8, one element per line."""
    w, h = _num(doc.width), _num(doc.height)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
    ]
    lines.extend(el.to_svg() for el in doc.elements)
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")
