"""Run configuration: defaults, JSON config files and flag precedence."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from color import DEFAULT_BASE, DEFAULT_BASE_2, DEFAULT_GAMMA, HclColor
from density import DEFAULT_BINS, DEFAULT_COVERAGE, SupportBounds
from errors import HddsError, InputError, UsageError
from geometry import DEFAULT_D_BASE, DEFAULT_K
from table import DEFAULT_CLASSES, DEFAULT_MIN_COUNT, TableConfig

logger = logging.getLogger("hdds.config")

NO_COLOR_ENV = "HDDS_NO_COLOR"
NORMALIZE_MODES = ("shared", "mode")
COMMANDS = ("plot", "compare", "table", "table-compare")


@dataclass
class RunConfig:
    inputs: List[str] = field(default_factory=list)
    target: Optional[str] = None
    by_x: Optional[str] = None
    by_y: Optional[str] = None
    compose: Optional[str] = None
    split: Optional[str] = None
    types: Dict[str, str] = field(default_factory=dict)
    levels: Dict[str, List[str]] = field(default_factory=dict)
    labels: Optional[Tuple[str, str]] = None
    classes: int = DEFAULT_CLASSES
    coverage: float = DEFAULT_COVERAGE
    lower: Optional[float] = None
    bounds: Optional[Tuple[float, float]] = None
    bins: int = DEFAULT_BINS
    bandwidth: Optional[float] = None
    gamma: float = DEFAULT_GAMMA
    color: HclColor = DEFAULT_BASE
    color2: HclColor = DEFAULT_BASE_2
    k: float = DEFAULT_K
    d_base: float = DEFAULT_D_BASE
    seed: int = 0
    dots: bool = False
    median: bool = False
    marks: List[float] = field(default_factory=list)
    normalize: str = "shared"
    with_ds: bool = False
    min_count: int = DEFAULT_MIN_COUNT
    workers: int = 1
    title: str = ""
    summary: bool = False
    out: Optional[str] = None

    def validate(self, command: str) -> None:
        """Range checks plus the per-subcommand input requirements; raises UsageError."""
        checks = [
            (0.0 < self.coverage <= 1.0, f"--coverage must lie in (0, 1], got {self.coverage}"),
            (self.bins >= 2, f"--bins must be at least 2, got {self.bins}"),
            (self.bandwidth is None or self.bandwidth > 0, f"--bandwidth must be positive, got {self.bandwidth}"),
            (math.isfinite(self.gamma) and self.gamma > 0, f"--gamma must be positive, got {self.gamma}"),
            (self.k > 0, f"--k must be positive, got {self.k}"),
            (self.d_base > 0, f"--d-base must be positive, got {self.d_base}"),
            (self.classes >= 2, f"--classes must be at least 2, got {self.classes}"),
            (self.seed >= 0, f"--seed must be nonnegative, got {self.seed}"),
            (self.min_count >= 1, f"--min-count must be at least 1, got {self.min_count}"),
            (self.workers >= 1, f"--workers must be at least 1, got {self.workers}"),
            (self.normalize in NORMALIZE_MODES, f"--normalize must be one of {NORMALIZE_MODES}"),
            (self.bounds is None or self.bounds[0] < self.bounds[1], f"--bounds needs LO < HI, got {self.bounds}"),
        ]
        for ok, message in checks:
            if not ok:
                raise UsageError(message)

        if command not in COMMANDS:
            raise UsageError(f"unknown subcommand '{command}'")
        if not self.inputs:
            raise UsageError(f"{command}: no input file given")
        if not self.target:
            raise UsageError(f"{command}: no target column given (--target)")
        two_sources = command in ("compare", "table-compare")
        if two_sources:
            if self.split and len(self.inputs) != 1:
                raise UsageError(f"{command}: --split takes exactly one input file")
            if not self.split and len(self.inputs) != 2:
                raise UsageError(f"{command}: needs two input files or --split COLUMN")
        else:
            if len(self.inputs) != 1:
                raise UsageError(f"{command}: takes exactly one input file")
            if self.split:
                raise UsageError(f"{command}: --split only applies to compare and table-compare")
        if command.startswith("table") and not self.by_x:
            raise UsageError(f"{command}: needs a conditioning column (--by-x)")
        if self.compose and not command.startswith("table"):
            raise UsageError("--compose only applies to table subcommands")
        if self.normalize != "shared" and command != "compare":
            raise UsageError("--normalize mode only applies to compare")
        if self.with_ds and command != "plot":
            raise UsageError("--with-ds only applies to plot")

    def base_colors(self) -> Tuple[HclColor, HclColor]:
        """Both base colors, reduced to gray when HDDS_NO_COLOR is set."""
        if os.environ.get(NO_COLOR_ENV):
            return self.color.grayscale(), self.color2.grayscale()
        return self.color, self.color2

    def support(self) -> Optional[SupportBounds]:
        if self.bounds is None:
            return None
        return SupportBounds(float(self.bounds[0]), float(self.bounds[1]))

    def table_config(self) -> TableConfig:
        base, base2 = self.base_colors()
        return TableConfig(
            coverage=self.coverage,
            lower_known=self.lower,
            bounds=self.support(),
            n_bins=self.bins,
            bandwidth=self.bandwidth,
            k=self.k,
            d_base=self.d_base,
            base=base,
            base2=base2,
            gamma=self.gamma,
            min_count=self.min_count,
            workers=self.workers,
        )

    def merged(self, overrides: Dict[str, Any]) -> "RunConfig":
        return replace(self, **{name: coerce(name, value) for name, value in overrides.items()})


def _pair(value: Any, name: str, cast) -> Tuple[Any, Any]:
    parts = value.split(",") if isinstance(value, str) else list(value)
    if len(parts) != 2:
        raise UsageError(f"'{name}' needs two comma-separated values, got {value!r}")
    return cast(str(parts[0]).strip()), cast(str(parts[1]).strip())


def coerce(name: str, value: Any) -> Any:
    """Convert a flag or config-file value to the type of the RunConfig field."""
    try:
        if name in ("color", "color2"):
            return value if isinstance(value, HclColor) else HclColor.parse(
                value if isinstance(value, str) else ",".join(str(v) for v in value)
            )
        if name == "bounds":
            return None if value is None else _pair(value, name, float)
        if name == "labels":
            return None if value is None else _pair(value, name, str)
        if name == "inputs":
            return [str(v) for v in ([value] if isinstance(value, str) else value)]
        if name == "marks":
            return [float(v) for v in value]
        if name in ("types", "levels"):
            if not isinstance(value, dict):
                raise UsageError(f"'{name}' must be a mapping")
            return dict(value)
        if name in ("classes", "bins", "seed", "min_count", "workers"):
            return int(value)
        if name in ("coverage", "gamma", "k", "d_base"):
            return float(value)
        if name in ("lower", "bandwidth"):
            return None if value is None else float(value)
    except HddsError as exc:
        raise UsageError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for '{name}': {value!r}") from exc
    return value


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """Read a JSON object of RunConfig fields. Unknown keys are rejected."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown keys in config file {path}: {', '.join(unknown)}")
    logger.debug("loaded %d settings from %s", len(data), path)
    return data


def resolve_config(flags: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """Defaults, then the config file, then the flags actually given."""
    config = RunConfig()
    if config_path:
        config = config.merged(load_config_file(config_path))
    return config.merged(flags)
