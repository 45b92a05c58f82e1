"""CSV ingestion: header-row CSV files into Dataset objects."""

from __future__ import annotations

import logging
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from density import Kind, Sample
from errors import InputError, ReasonCode, UsageError
from table import BinningRule, ConditioningColumn, Dataset, bin_continuous, compose_conditioning, split_dataset

logger = logging.getLogger("hdds.ingest")

DISCRETE_MAX_LEVELS = 25
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "-", "?"})


class ColumnKind(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"
    CATEGORICAL = "categorical"


def _missing(raw: pd.Series) -> np.ndarray:
    return raw.str.strip().str.lower().isin(MISSING_TOKENS).to_numpy()


def infer_kind(raw: pd.Series) -> ColumnKind:
    """
    Integers with at most 25 distinct values are discrete, other numbers are
    continuous, anything else is categorical. Missing tokens are ignored.
    """
    present = raw[~_missing(raw)].str.strip()
    numeric = pd.to_numeric(present, errors="coerce").to_numpy(dtype=float)
    if present.empty:
        return ColumnKind.CONTINUOUS
    if not np.all(np.isfinite(numeric)):
        return ColumnKind.CATEGORICAL
    if np.all(numeric == np.round(numeric)) and np.unique(numeric).size <= DISCRETE_MAX_LEVELS:
        return ColumnKind.DISCRETE
    return ColumnKind.CONTINUOUS


def _read(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise InputError(f"input file not found: {path}", ReasonCode.MISSING_FILE)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    except pd.errors.EmptyDataError as exc:
        raise InputError(f"{path}: no header row", ReasonCode.NO_RECORDS) from exc
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise InputError(f"cannot read {path}: {exc}", ReasonCode.MISSING_FILE) from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric(raw: pd.Series) -> np.ndarray:
    """Float values; NaN marks missing or unparseable entries."""
    text = raw.str.strip().mask(_missing(raw))
    values = pd.to_numeric(text, errors="coerce").to_numpy(dtype=float)
    values[~np.isfinite(values)] = np.nan
    return values


class _ColumnParser:
    """Parses one named column of every frame: values plus a validity mask per frame."""

    def __init__(self, name: str, frames: Sequence[pd.DataFrame], kind: ColumnKind):
        self.name = name
        self.kind = kind
        self.parsed: List[np.ndarray] = []
        self.valid: List[np.ndarray] = []
        for frame in frames:
            raw = frame[name]
            if kind is ColumnKind.CATEGORICAL:
                self.parsed.append(raw.str.strip().to_numpy(dtype=object))
                self.valid.append(~_missing(raw))
                continue
            values = _numeric(raw)
            ok = ~np.isnan(values)
            if kind is ColumnKind.DISCRETE:
                ok &= np.nan_to_num(values) == np.round(np.nan_to_num(values))
            self.parsed.append(values)
            self.valid.append(ok)

    def levels(self, keeps: Sequence[np.ndarray], n_classes: int,
               order: Optional[Sequence[str]]) -> List[ConditioningColumn]:
        """One conditioning column per frame, sharing levels (and cut points) across frames."""
        kept = [values[keep] for values, keep in zip(self.parsed, keeps)]
        if self.kind is ColumnKind.CONTINUOUS:
            rule = BinningRule(n_classes).fitted(np.concatenate(kept))
            logger.info("binned '%s' at %s", self.name, ", ".join(f"{e:.4g}" for e in rule.edges))
            return [bin_continuous(values, rule, self.name) for values in kept]
        if self.kind is ColumnKind.DISCRETE:
            kept = [[str(int(v)) for v in values] for values in kept]
            if order is None:
                order = sorted({label for labels in kept for label in labels}, key=int)
        elif order is None:
            order = list(dict.fromkeys(label for labels in kept for label in labels))
        return [ConditioningColumn.from_labels(self.name, list(labels), order) for labels in kept]


def _resolve_kind(name: str, frames: Sequence[pd.DataFrame], hints: Dict[str, str]) -> ColumnKind:
    if name in hints:
        try:
            return ColumnKind(hints[name])
        except ValueError as exc:
            raise UsageError(f"unknown type '{hints[name]}' for column '{name}'") from exc
    return infer_kind(pd.concat([frame[name] for frame in frames], ignore_index=True))


def _load(paths: Sequence[Path], config) -> List[Tuple[Dataset, Optional[ConditioningColumn]]]:
    frames = [_read(path) for path in paths]

    wanted = list(dict.fromkeys(c for c in (config.target, config.by_x, config.by_y, config.compose, config.split) if c))
    for path, frame in zip(paths, frames):
        for column in wanted:
            if column not in frame.columns:
                raise UsageError(
                    f"column '{column}' not found in {path} (columns: {', '.join(frame.columns)})",
                    ReasonCode.UNKNOWN_COLUMN,
                )

    hints = dict(config.types or {})
    target_kind = _resolve_kind(config.target, frames, hints)
    if target_kind is ColumnKind.CATEGORICAL:
        raise UsageError(f"target column '{config.target}' is not numeric")
    target = _ColumnParser(config.target, frames, target_kind)

    parsers: Dict[str, _ColumnParser] = {}
    for column in wanted[1:]:
        kind = ColumnKind.CATEGORICAL if column == config.split else _resolve_kind(column, frames, hints)
        parsers[column] = _ColumnParser(column, frames, kind)

    keeps = []
    for index, (path, frame) in enumerate(zip(paths, frames)):
        keep = target.valid[index].copy()
        for parser in parsers.values():
            keep &= parser.valid[index]
        dropped = int(len(frame) - keep.sum())
        if dropped:
            logger.warning("%s: dropped %d of %d records with missing or unparseable values",
                           path, dropped, len(frame))
        if not keep.any():
            raise InputError(f"{path}: zero usable records", ReasonCode.NO_RECORDS)
        keeps.append(keep)

    orders = dict(config.levels or {})
    columns = {name: parser.levels(keeps, config.classes, orders.get(name)) for name, parser in parsers.items()}
    sample_kind = Kind.DISCRETE if target_kind is ColumnKind.DISCRETE else Kind.CONTINUOUS

    loaded = []
    for index, (path, frame) in enumerate(zip(paths, frames)):
        ds = Dataset(
            target=Sample(target.parsed[index][keeps[index]], sample_kind),
            cond_x=columns[config.by_x][index] if config.by_x else None,
            cond_y=columns[config.by_y][index] if config.by_y else None,
            source_label=path.stem,
            target_name=config.target,
            dropped=int(len(frame) - keeps[index].sum()),
        )
        if config.compose:
            ds = compose_conditioning(ds, columns[config.compose][index])
        loaded.append((ds, columns[config.split][index] if config.split else None))
    return loaded


def ingest_many(paths: Sequence[str], config) -> List[Dataset]:
    """
    Ingest several CSV files against one column configuration.

    Type inference, level order and percentile cut points are computed over
    all files together so the datasets share their levels.
    """
    if not paths:
        raise UsageError("no input files given")
    if not config.target:
        raise UsageError("no target column given (--target)")
    return [ds for ds, _ in _load([Path(p) for p in paths], config)]


def ingest(path: str, config) -> Dataset:
    return ingest_many([path], config)[0]


def load_sources(config) -> List[Dataset]:
    """
    Datasets named by a run configuration: one per input file, or the two
    parts of a single file when a split column is configured.
    """
    if config.split:
        if len(config.inputs) != 1:
            raise UsageError("--split takes exactly one input file")
        if not config.target:
            raise UsageError("no target column given (--target)")
        [(ds, column)] = _load([Path(config.inputs[0])], config)
        datasets = list(split_dataset(ds, column))
    else:
        datasets = ingest_many(config.inputs, config)

    labels = list(config.labels or ())
    if labels:
        if len(labels) != len(datasets):
            raise UsageError(f"{len(labels)} labels given for {len(datasets)} sources")
        datasets = [replace(ds, source_label=label) for ds, label in zip(datasets, labels)]
    return datasets
