import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from color import make_context
from density import Kind, Sample, SupportBounds, display_bounds, estimate, estimate_continuous, truncation_bounds
from errors import ParameterError
from geometry import Orientation, tessellate
from render import (
    DOT_EDGE_INSET,
    DOT_RADIAL_RANGE,
    GRID_GRAY,
    SEAM_WIDTH,
    Box,
    FigureDoc,
    Label,
    Line,
    Marker,
    RenderOptions,
    SectorPath,
    _num,
    comparison_figure,
    pair_figure,
    render_density_strip,
    render_disk_pair,
    render_dots,
    render_strip,
    serialize,
    strip_figure,
    table_figure,
)
from table import TableConfig, build_comparison, build_table

from conftest import FLAT_BANDWIDTH, FLAT_BINS, make_dataset, stratified_uniform

SVG = "{http://www.w3.org/2000/svg}"


def parse(doc: FigureDoc) -> ET.Element:
    return ET.fromstring(serialize(doc))


def simple_strip(values, bounds=(-1.0, 1.0), bins=16, diameter=100.0, orientation=Orientation.UP):
    sample = Sample(values)
    grid = estimate_continuous(sample, SupportBounds(*bounds), bins)
    return sample, grid, tessellate(grid, make_context([grid]), diameter, orientation)


class TestNumbers:
    def test_four_decimals(self):
        assert _num(1.23456) == "1.2346"
        assert _num(2) == "2.0000"

    def test_no_negative_zero(self):
        assert _num(-0.00001) == "0.0000"
        assert _num(-0.0) == "0.0000"


class TestPrimitives:
    def test_sector_path_up(self):
        path = SectorPath(0.0, 0.0, 10.0, 0.0, math.pi / 2, "#FF0000").to_svg()
        assert 'd="M 0.0000 0.0000 L 10.0000 0.0000 A 10.0000 10.0000 0 0 0 0.0000 -10.0000 Z"' in path
        assert 'fill="#FF0000" stroke="#FF0000"' in path

    def test_sector_path_down(self):
        path = SectorPath(0.0, 0.0, 10.0, 0.0, math.pi / 2, "#FF0000", flip=True).to_svg()
        assert "A 10.0000 10.0000 0 0 1 0.0000 10.0000 Z" in path

    def test_label_is_escaped(self):
        svg = Label(0.0, 0.0, "a<b & c").to_svg()
        assert "a&lt;b &amp; c" in svg
        ET.fromstring(svg)

    def test_figure_size_checked(self):
        with pytest.raises(ParameterError):
            FigureDoc(0.0, 10.0)


class TestSerialize:
    def test_empty_document(self):
        root = parse(FigureDoc(40.0, 30.0))
        assert root.tag == f"{SVG}svg"
        assert root.get("viewBox") == "0 0 40.0000 30.0000"
        assert len(root) == 0

    def test_single_sector(self):
        sample = Sample([3, 3, 3], Kind.DISCRETE)
        grid = estimate(sample, display_bounds(sample))
        strip = tessellate(grid, make_context([grid]), 80.0)
        root = parse(strip_figure(strip))
        assert len(root.findall(f"{SVG}path")) == 1

    def test_one_path_per_bin(self):
        _, _, strip = simple_strip(np.linspace(-0.9, 0.9, 50), bins=24)
        root = parse(strip_figure(strip))
        assert len(root.findall(f"{SVG}path")) == 24

    def test_deterministic(self, mixture_sample):
        grid = estimate_continuous(mixture_sample, truncation_bounds(mixture_sample))
        strip = tessellate(grid, make_context([grid]), 120.0)
        opts = RenderOptions(show_median=True, show_dots=True)

        def draw(seed):
            overlay = render_dots(mixture_sample, strip, seed)
            return serialize(strip_figure(strip, opts, overlay, (grid, make_context([grid])), seed))

        assert draw(4) == draw(4)
        assert draw(4) != draw(5)

    def test_scaled_keeps_fills(self):
        _, _, strip = simple_strip(np.linspace(-0.9, 0.9, 50))
        doc = strip_figure(strip)
        big = doc.scaled(2.5)
        assert big.width == pytest.approx(2.5 * doc.width)
        fills = [el.get("fill") for el in parse(doc).iter(f"{SVG}path")]
        assert fills == [el.get("fill") for el in parse(big).iter(f"{SVG}path")]

    def test_scaled_seam_strokes(self):
        _, grid, strip = simple_strip(np.linspace(-0.9, 0.9, 50))
        doc = FigureDoc(120.0, 80.0)
        doc.extend(render_strip(strip, 60.0, 60.0, RenderOptions(show_bounds=False)))
        doc.extend(render_density_strip(grid, make_context([grid]), 10.0, 70.0, 100.0, 5.0))
        big = parse(doc.scaled(2.5))
        widths = {el.get("stroke-width") for tag in ("path", "rect") for el in big.iter(f"{SVG}{tag}")}
        assert widths == {_num(2.5 * SEAM_WIDTH)}


class TestStrip:
    def test_median_tick_angle(self):
        _, _, strip = simple_strip([-0.6, -0.2, 0.0, 0.1, 0.7])
        elements = render_strip(strip, 0.0, 0.0, RenderOptions(show_median=True, show_bounds=False))
        [tick] = [el for el in elements if isinstance(el, Line)]
        assert math.atan2(-tick.y1, tick.x1) == pytest.approx(strip.median_angle, abs=1e-12)
        assert strip.median_angle == pytest.approx(math.pi / 2)

    def test_bound_labels_and_marks(self):
        sample = Sample([-0.6, -0.2, 0.0, 0.1, 0.7])
        grid = estimate_continuous(sample, SupportBounds(-1.0, 1.0), 8)
        strip = tessellate(grid, make_context([grid]), 100.0, marks=[0.25])
        texts = [el.text for el in render_strip(strip, 0.0, 0.0) if isinstance(el, Label)]
        assert texts == ["1", "-1", "0.25"]

    def test_disk_pair(self):
        _, _, top = simple_strip(np.linspace(-0.9, 0.9, 50))
        _, _, bottom = simple_strip(np.linspace(-0.5, 0.9, 50), orientation=Orientation.DOWN)
        elements = render_disk_pair(top, bottom, 60.0, 60.0)
        paths = [el for el in elements if isinstance(el, SectorPath)]
        assert len(paths) == 32
        assert sum(p.flip for p in paths) == 16

    def test_disk_pair_inscribed(self):
        _, _, top = simple_strip(np.linspace(-0.9, 0.9, 50), diameter=200.0)
        _, _, bottom = simple_strip(np.linspace(-0.5, 0.9, 50), diameter=100.0, orientation=Orientation.DOWN)
        elements = render_disk_pair(top, bottom, 150.0, 120.0)
        paths = [el for el in elements if isinstance(el, SectorPath)]
        assert {(p.cx, p.cy) for p in paths} == {(150.0, 120.0)}
        assert {p.radius for p in paths if not p.flip} == {100.0}
        assert {p.radius for p in paths if p.flip} == {50.0}
        [diameter_line] = [el for el in elements if isinstance(el, Line)]
        assert (diameter_line.x1, diameter_line.x2) == (50.0, 250.0)
        assert diameter_line.y1 == diameter_line.y2 == 120.0

    def test_disk_pair_orientation(self):
        _, _, strip = simple_strip(np.linspace(-0.9, 0.9, 50))
        with pytest.raises(ParameterError):
            render_disk_pair(strip, strip, 0.0, 0.0)

    def test_density_strip(self):
        _, grid, strip = simple_strip(np.linspace(-0.9, 0.9, 50), bins=10)
        boxes = render_density_strip(grid, make_context([grid]), 5.0, 0.0, 50.0, 8.0)
        assert len(boxes) == 10 and all(isinstance(b, Box) for b in boxes)
        assert boxes[0].x == 5.0
        assert sum(b.width for b in boxes) == pytest.approx(50.0)


class TestDots:
    def test_continuous_angles_are_exact(self):
        sample, _, strip = simple_strip([-0.5, 0.0, 0.5])
        overlay = render_dots(sample, strip, seed=1)
        angles = [a for a, _ in overlay.positions]
        assert angles == pytest.approx([3 * math.pi / 4, math.pi / 2, math.pi / 4])
        assert overlay.dropped == 0

    def test_bound_values_stay_off_the_diameter(self):
        _, _, strip = simple_strip([-0.5, 0.0, 0.5])
        overlay = render_dots(Sample([-1.0, 0.0, 1.0]), strip, seed=1)
        angles = [a for a, _ in overlay.positions]
        assert overlay.dropped == 0
        assert all(0.0 < a < math.pi for a in angles)
        assert angles[0] == pytest.approx(math.pi - DOT_EDGE_INSET)
        assert angles[2] == pytest.approx(DOT_EDGE_INSET)

    def test_radial_range(self, mixture_sample):
        grid = estimate_continuous(mixture_sample, truncation_bounds(mixture_sample, 1.0))
        strip = tessellate(grid, make_context([grid]), 100.0)
        overlay = render_dots(mixture_sample, strip, seed=9)
        lo, hi = DOT_RADIAL_RANGE
        assert len(overlay.positions) == mixture_sample.n
        assert all(lo <= f <= hi for _, f in overlay.positions)

    def test_discrete_jitter(self):
        sample = Sample([3, 3, 3, 3], Kind.DISCRETE)
        grid = estimate(sample, display_bounds(sample))
        strip = tessellate(grid, make_context([grid]), 80.0)
        angles = [a for a, _ in render_dots(sample, strip, seed=2).positions]
        assert len(set(angles)) == 4
        assert all(abs(a - math.pi / 2) <= 0.35 * math.pi for a in angles)

    def test_points_outside_bounds_dropped(self):
        _, _, strip = simple_strip([-0.5, 0.0, 0.5])
        overlay = render_dots(Sample([-5.0, 0.0, 0.5, 9.0]), strip, seed=0)
        assert overlay.dropped == 2
        assert len(overlay.positions) == 2

    def test_seed_checked(self):
        sample, _, strip = simple_strip([-0.5, 0.0, 0.5])
        with pytest.raises(ParameterError):
            render_dots(sample, strip, seed=-1)


def uniform_and_normal(n=100_000, seed=31):
    rng = np.random.default_rng(seed)
    uniform = stratified_uniform(n, -1.0, 1.0, rng)
    normal = Sample(rng.normal(0.0, 0.4, n))
    return uniform, estimate_continuous(normal, truncation_bounds(normal, 0.99), 128)


def test_shared_context_contrast():
    """Uniform vs normal under one context: flat light strip, darker normal centre."""
    uniform, n_grid = uniform_and_normal()
    u_grid = estimate_continuous(uniform, SupportBounds(-1.0, 1.0), FLAT_BINS, bandwidth=FLAT_BANDWIDTH)
    ctx = make_context([u_grid, n_grid], gamma=1.0)

    u_strip = tessellate(u_grid, ctx, 100.0)
    n_strip = tessellate(n_grid, ctx, 100.0)
    u_lum = [s.fill.luminance for s in u_strip.sectors]
    assert max(u_lum) - min(u_lum) < 3.0

    centre = min(n_strip.sectors, key=lambda s: abs(s.theta_start + s.theta_end - math.pi))
    assert centre.fill.luminance < min(u_lum)

    ratio = n_grid.values.max() / u_grid.values.mean()
    assert ratio == pytest.approx(0.9974 / 0.5, rel=0.05)


def test_uniform_edges_lighten_with_default_bandwidth():
    uniform, n_grid = uniform_and_normal()
    u_grid = estimate_continuous(uniform, SupportBounds(-1.0, 1.0), 128)
    ctx = make_context([u_grid, n_grid], gamma=1.0)
    u_lum = [s.fill.luminance for s in tessellate(u_grid, ctx, 100.0).sectors]
    assert max(u_lum) - min(u_lum) > 10.0
    # the outer sectors are the lightest
    assert max(u_lum) in (u_lum[0], u_lum[-1])


class TestLayouts:
    def test_pair_figure(self):
        _, _, top = simple_strip(np.linspace(-0.9, 0.9, 50))
        _, _, bottom = simple_strip(np.linspace(-0.5, 0.9, 50), orientation=Orientation.DOWN)
        root = parse(pair_figure(top, bottom, RenderOptions(title="A vs B"), labels=("north", "south")))
        texts = [el.text for el in root.iter(f"{SVG}text")]
        assert "A vs B" in texts and "north" in texts and "south" in texts

    def test_table_figure(self, independent_dataset):
        table = build_table(independent_dataset, TableConfig(n_bins=32))
        root = parse(table_figure(table))
        assert len(root.findall(f"{SVG}path")) == 12 * 32
        texts = [el.text for el in root.iter(f"{SVG}text")]
        for label in ("a", "b", "u", "v", "w", "all"):
            assert label in texts

    def test_sparse_and_empty_cells(self):
        rng = np.random.default_rng(8)
        x = ["a"] * 60 + ["b"] * 3
        y = ["u"] * 30 + ["v"] * 30 + ["u"] * 3
        table = build_table(make_dataset(rng.normal(size=63), x, y), TableConfig(n_bins=16))
        root = parse(table_figure(table))
        texts = [el.text for el in root.iter(f"{SVG}text")]
        assert "n = 0" in texts
        markers = root.findall(f"{SVG}circle")
        # (b, u) and the b margin hold 3 records each
        assert len(markers) == 6
        outlines = [p for p in root.iter(f"{SVG}path") if p.get("stroke") == GRID_GRAY]
        assert len(outlines) == 2

    def test_dots_in_table(self):
        rng = np.random.default_rng(8)
        ds = make_dataset(rng.normal(size=40), ["a", "b"] * 20)
        table = build_table(ds, TableConfig(n_bins=8, bounds=SupportBounds(-10.0, 10.0)))
        doc = table_figure(table, RenderOptions(show_dots=True))
        # two rows plus the margin, every record drawn in its row and again in the margin
        assert sum(isinstance(el, Marker) for el in doc.elements) == 80

    def test_comparison_figure(self):
        rng = np.random.default_rng(12)
        a = make_dataset(rng.normal(0, 1, 400), list(rng.choice(["p", "q"], 400)), label="first")
        b = make_dataset(rng.normal(1, 1, 300), list(rng.choice(["q", "p"], 300)), label="second")
        comparison = build_comparison(a, b, TableConfig(n_bins=16))
        root = parse(comparison_figure(comparison))
        assert len(root.findall(f"{SVG}path")) == 2 * 3 * 16
        texts = [el.text for el in root.iter(f"{SVG}text")]
        assert "first" in texts and "second" in texts
        assert any(t.startswith("support [") for t in texts)
