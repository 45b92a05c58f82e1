import json

import pytest

from color import DEFAULT_BASE, HclColor
from density import SupportBounds
from errors import InputError, UsageError
from run_config import NO_COLOR_ENV, RunConfig, coerce, load_config_file, resolve_config


def config_file(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return str(path)


def valid(**changes) -> RunConfig:
    base = dict(inputs=["a.csv"], target="z")
    base.update(changes)
    return RunConfig(**base)


class TestPrecedence:
    def test_defaults(self):
        config = resolve_config({})
        assert config.bins == 128
        assert config.coverage == 0.99
        assert config.color == DEFAULT_BASE
        assert config.k == 0.5

    def test_file_then_flags(self, tmp_path):
        path = config_file(tmp_path, {"bins": 8, "gamma": 2, "color": [250, 90, 30]})
        config = resolve_config({"bins": "16"}, path)
        assert config.bins == 16
        assert config.gamma == 2.0
        assert config.color == HclColor(250.0, 90.0, 30.0)

    def test_unknown_keys(self, tmp_path):
        with pytest.raises(UsageError, match="colour"):
            load_config_file(config_file(tmp_path, {"colour": "red"}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_config_file(tmp_path / "absent.json")

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
    def test_bad_content(self, tmp_path, text):
        with pytest.raises(UsageError):
            load_config_file(config_file(tmp_path, text))


class TestCoerce:
    def test_bounds(self):
        assert coerce("bounds", "-6,6") == (-6.0, 6.0)
        assert coerce("bounds", [0, 1]) == (0.0, 1.0)

    def test_labels(self):
        assert coerce("labels", "North, South") == ("North", "South")

    def test_color(self):
        assert coerce("color", "10,90,30") == DEFAULT_BASE

    @pytest.mark.parametrize("name, value", [("bins", "many"), ("bounds", "1,2,3"), ("color", "1,2"), ("types", "x")])
    def test_bad_values(self, name, value):
        with pytest.raises(UsageError):
            coerce(name, value)


class TestValidate:
    def test_accepts_plot(self):
        valid().validate("plot")

    @pytest.mark.parametrize(
        "changes",
        [
            {"coverage": 0.0},
            {"bins": 1},
            {"gamma": -1.0},
            {"k": 0.0},
            {"bandwidth": 0.0},
            {"bounds": (3.0, 1.0)},
            {"inputs": []},
            {"target": None},
            {"inputs": ["a.csv", "b.csv"]},
            {"split": "region"},
            {"compose": "w"},
            {"normalize": "mode"},
        ],
    )
    def test_plot_rejects(self, changes):
        with pytest.raises(UsageError):
            valid(**changes).validate("plot")

    def test_compare_sources(self):
        valid(inputs=["a.csv", "b.csv"]).validate("compare")
        valid(split="region").validate("compare")
        valid(normalize="mode", split="region").validate("compare")
        with pytest.raises(UsageError):
            valid().validate("compare")
        with pytest.raises(UsageError):
            valid(inputs=["a.csv", "b.csv"], split="region").validate("compare")
        with pytest.raises(UsageError):
            valid(split="region", with_ds=True).validate("compare")

    def test_table_needs_by_x(self):
        with pytest.raises(UsageError):
            valid().validate("table")
        valid(by_x="g", by_y="h", compose="w").validate("table")

    def test_unknown_command(self):
        with pytest.raises(UsageError):
            valid().validate("draw")


def test_base_colors_without_color(monkeypatch):
    monkeypatch.setenv(NO_COLOR_ENV, "1")
    first, second = RunConfig().base_colors()
    assert first.chroma == 0.0 and second.chroma == 0.0
    assert first.luminance == DEFAULT_BASE.luminance


def test_table_config():
    cfg = valid(bounds=(0.0, 5.0), bins=32, min_count=3, workers=2, lower=0.0).table_config()
    assert cfg.bounds == SupportBounds(0.0, 5.0)
    assert (cfg.n_bins, cfg.min_count, cfg.workers, cfg.lower_known) == (32, 3, 2, 0.0)
