import numpy as np
import pytest

from color import (
    DEFAULT_BASE,
    HclColor,
    RgbColor,
    ShadingContext,
    hcl_to_rgb,
    make_context,
    mixing_weight,
    shade,
    total_ink,
)
from density import Kind, Sample, SupportBounds, estimate_continuous, estimate_discrete
from errors import DataError, ParameterError

from conftest import FLAT_BANDWIDTH, FLAT_BINS


@pytest.fixture
def ctx():
    return ShadingContext(base=HclColor(10.0, 90.0, 30.0), gamma=1.0, norm=2.0)


class TestHclColor:
    def test_hue_wraps(self):
        assert HclColor(370.0, 10.0, 50.0).hue == pytest.approx(10.0)

    @pytest.mark.parametrize("args", [(0, -1, 50), (0, 10, 101), (0, 10, -0.5)])
    def test_ranges(self, args):
        with pytest.raises(ParameterError):
            HclColor(*args)

    def test_parse(self):
        assert HclColor.parse("250, 90, 30") == HclColor(250.0, 90.0, 30.0)
        with pytest.raises(ParameterError):
            HclColor.parse("250,90")

    def test_grayscale(self):
        gray = DEFAULT_BASE.grayscale()
        assert gray.chroma == 0.0 and gray.luminance == DEFAULT_BASE.luminance


class TestShade:
    def test_zero_is_white(self, ctx):
        c = shade(0.0, ctx)
        assert c.chroma == 0.0 and c.luminance == 100.0
        assert c == ctx.white

    def test_norm_is_base(self, ctx):
        assert shade(ctx.norm, ctx) == ctx.base

    def test_gamma_midpoint(self):
        ctx = ShadingContext(HclColor(10.0, 90.0, 30.0), gamma=0.5, norm=4.0)
        assert mixing_weight(1.0, ctx) == 0.5
        c = shade(1.0, ctx)
        assert c.chroma == pytest.approx(45.0)
        assert c.luminance == pytest.approx(65.0)

    def test_clipped_above_norm(self, ctx):
        assert shade(10.0, ctx) == ctx.base

    def test_hue_constant(self, ctx):
        assert {shade(v, ctx).hue for v in np.linspace(0.1, 2.0, 7)} == {ctx.base.hue}

    def test_negative_rejected(self, ctx):
        with pytest.raises(ParameterError):
            shade(-0.1, ctx)

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 1.0, 2.0, 3.5])
    def test_strictly_monotone(self, gamma):
        ctx = ShadingContext(DEFAULT_BASE, gamma, 1.0)
        lum = [shade(v, ctx).luminance for v in np.linspace(0.0, 1.0, 50)]
        assert all(a > b for a, b in zip(lum, lum[1:]))


class TestMakeContext:
    def test_max_over_grids(self):
        a = estimate_discrete(Sample([0, 0, 0, 1], Kind.DISCRETE))
        b = estimate_discrete(Sample([0, 1], Kind.DISCRETE))
        assert make_context([a, b]).norm == 0.75
        assert make_context([b]).norm == 0.5
        assert make_context([a, a]).norm == make_context([a]).norm

    def test_uniform_and_normal_peak(self):
        rng = np.random.default_rng(17)
        uniform = Sample(rng.uniform(-1, 1, 100_000))
        normal = Sample(rng.normal(0, 0.4, 100_000))
        bounds = SupportBounds(-1.0, 1.0)
        grids = [
            estimate_continuous(uniform, bounds, FLAT_BINS, bandwidth=FLAT_BANDWIDTH),
            estimate_continuous(normal, SupportBounds(-1.6, 1.6), 128),
        ]
        assert make_context(grids).norm == pytest.approx(0.9974, rel=0.03)

    def test_empty_collection(self):
        with pytest.raises(ParameterError):
            make_context([])

    def test_degenerate_context(self):
        with pytest.raises(DataError):
            ShadingContext(DEFAULT_BASE, 1.0, 0.0)


class TestHclToRgb:
    def test_white(self):
        rgb = hcl_to_rgb(HclColor(123.0, 0.0, 100.0))
        assert rgb.r == rgb.g == rgb.b
        assert rgb.r == pytest.approx(1.0, abs=1e-12)

    def test_black(self):
        assert hcl_to_rgb(HclColor(40.0, 0.0, 0.0)) == RgbColor(0.0, 0.0, 0.0)

    def test_golden_value(self):
        rgb = hcl_to_rgb(HclColor(0.0, 50.0, 50.0))
        assert rgb.r == pytest.approx(0.6771001959, abs=1e-6)
        assert rgb.g == pytest.approx(0.3769275800, abs=1e-6)
        assert rgb.b == pytest.approx(0.4416942829, abs=1e-6)

    @pytest.mark.parametrize("luminance", [0.5, 5.0, 8.0, 42.0, 77.7])
    def test_achromatic_is_gray(self, luminance):
        rgb = hcl_to_rgb(HclColor(200.0, 0.0, luminance))
        assert rgb.r == rgb.g == rgb.b

    def test_out_of_gamut_is_clamped(self):
        rgb = hcl_to_rgb(HclColor(130.0, 200.0, 90.0))
        assert all(0.0 <= c <= 1.0 for c in (rgb.r, rgb.g, rgb.b))

    def test_hex(self):
        assert RgbColor(1.0, 0.0, 0.5).hex() == "#FF0080"
        assert hcl_to_rgb(HclColor(0.0, 0.0, 100.0)).hex() == "#FFFFFF"


def test_total_ink_equal_across_context():
    """Under one context with gamma 1, every normalized grid carries the same ink."""
    rng = np.random.default_rng(23)
    bounds = SupportBounds(-4.0, 4.0)
    grids = [
        estimate_continuous(Sample(rng.normal(0, 1, 20_000)), bounds, 400),
        estimate_continuous(Sample(rng.normal(1, 0.5, 20_000)), bounds, 400),
        estimate_continuous(Sample(rng.uniform(-3, 3, 20_000)), bounds, 400),
    ]
    ctx = make_context(grids, gamma=1.0)
    inks = [total_ink(g, ctx) for g in grids]
    expected = (1.0 - DEFAULT_BASE.luminance / 100.0) / ctx.norm
    for ink in inks:
        assert ink == pytest.approx(expected, abs=1e-3)


def test_equal_values_share_color_in_context():
    a = estimate_discrete(Sample([0, 1, 1, 2], Kind.DISCRETE))
    b = estimate_discrete(Sample([5, 5, 6, 7, 7, 7, 7, 7], Kind.DISCRETE))
    ctx = make_context([a, b])
    # 0.25 appears in both grids
    assert shade(float(a.values[0]), ctx) == shade(float(b.values[0]), ctx)
