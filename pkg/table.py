"""
HDDS tables: conditional and marginal densities on an (I+1) x (J+1) grid.

Inner cells hold p(z | x_i, y_j), the last column p(z | x_i), the last row
p(z | y_j) and the corner p(z). Each half disk's diameter follows the
probability of its conditioning event; all cells share one support and one
shading context.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from color import DEFAULT_BASE, DEFAULT_BASE_2, DEFAULT_GAMMA, HclColor, ShadingContext, make_context
from density import (
    DEFAULT_BINS,
    DEFAULT_COVERAGE,
    DensityGrid,
    Sample,
    SupportBounds,
    estimate,
    resolve_bounds,
)
from errors import DataError, ParameterError, ReasonCode
from geometry import DEFAULT_D_BASE, DEFAULT_K, HalfDiskStrip, Orientation, diameter_scale, tessellate

logger = logging.getLogger("hdds.table")

DEFAULT_MIN_COUNT = 5
DEFAULT_CLASSES = 3
MARGIN_LABEL = "all"
COMPOSITE_SEPARATOR = "×"


@dataclass(frozen=True, eq=False)
class ConditioningColumn:
    """Ordered categorical levels plus one level index per record."""

    name: str
    levels: Tuple[str, ...]
    codes: np.ndarray

    def __post_init__(self):
        levels = tuple(str(level) for level in self.levels)
        if not levels:
            raise ParameterError(f"column '{self.name}' has no levels")
        if len(set(levels)) != len(levels):
            raise ParameterError(f"column '{self.name}' has repeated levels")
        codes = np.array(self.codes, dtype=np.int64).ravel()
        if codes.size and (codes.min() < 0 or codes.max() >= len(levels)):
            raise ParameterError(f"column '{self.name}' has a level index out of range")
        codes.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return int(self.codes.size)

    @classmethod
    def from_labels(
        cls, name: str, labels: Sequence[str], order: Optional[Sequence[str]] = None
    ) -> "ConditioningColumn":
        """Levels in first-appearance order, or `order` followed by any unlisted labels."""
        labels = [str(label) for label in labels]
        seen = list(dict.fromkeys(labels))
        if order is None:
            levels = tuple(seen)
        else:
            listed = [str(level) for level in order]
            levels = tuple(listed) + tuple(level for level in seen if level not in listed)
        index = {level: i for i, level in enumerate(levels)}
        return cls(name, levels, np.array([index[label] for label in labels], dtype=np.int64))

    def counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=len(self.levels))

    def subset(self, mask: np.ndarray) -> "ConditioningColumn":
        return ConditioningColumn(self.name, self.levels, self.codes[mask])

    def reordered(self, levels: Sequence[str]) -> "ConditioningColumn":
        levels = tuple(levels)
        if set(levels) != set(self.levels) or len(levels) != len(self.levels):
            raise ParameterError(f"reordering of '{self.name}' must keep the same level set")
        position = np.array([levels.index(level) for level in self.levels], dtype=np.int64)
        return ConditioningColumn(self.name, levels, position[self.codes])


@dataclass(frozen=True, eq=False)
class Dataset:
    target: Sample
    cond_x: Optional[ConditioningColumn] = None
    cond_y: Optional[ConditioningColumn] = None
    source_label: str = ""
    target_name: str = "z"
    dropped: int = 0

    def __post_init__(self):
        for column in (self.cond_x, self.cond_y):
            if column is not None and len(column) != self.target.n:
                raise ParameterError(
                    f"column '{column.name}' has {len(column)} records, target has {self.target.n}"
                )

    @property
    def n(self) -> int:
        return self.target.n

    def subset(self, mask: np.ndarray) -> "Dataset":
        mask = np.asarray(mask, dtype=bool)
        return replace(
            self,
            target=Sample(self.target.values[mask], self.target.kind),
            cond_x=self.cond_x.subset(mask) if self.cond_x is not None else None,
            cond_y=self.cond_y.subset(mask) if self.cond_y is not None else None,
        )


@dataclass(frozen=True)
class BinningRule:
    """
    Equal-percentile classes for a continuous conditioner.

    A value equal to an interior cut point belongs to the lower class; the
    first class is closed on both ends.
    """

    n_classes: int = DEFAULT_CLASSES
    edges: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_classes < 2:
            raise ParameterError(f"n_classes must be at least 2, got {self.n_classes}")
        if self.edges:
            edges = np.asarray(self.edges, dtype=float)
            if edges.size != self.n_classes + 1:
                raise ParameterError("a binning rule needs n_classes + 1 edges")
            if not np.all(np.diff(edges) > 0):
                raise DataError(
                    "degenerate binning: percentile cut points are not strictly increasing",
                    ReasonCode.DEGENERATE_BINNING,
                )

    def fitted(self, values) -> "BinningRule":
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ParameterError("binning needs finite values")
        if np.unique(values).size <= self.n_classes:
            raise DataError(
                f"degenerate binning: {np.unique(values).size} distinct values for {self.n_classes} classes",
                ReasonCode.DEGENERATE_BINNING,
            )
        cuts = np.quantile(values, np.arange(self.n_classes + 1) / self.n_classes, method="linear")
        return BinningRule(self.n_classes, tuple(float(c) for c in cuts))

    def classify(self, values) -> np.ndarray:
        inner = np.asarray(self.edges[1:-1], dtype=float)
        return np.searchsorted(inner, np.asarray(values, dtype=float), side="left")

    def labels(self) -> Tuple[str, ...]:
        e = self.edges
        return tuple(
            f"{'[' if m == 0 else '('}{e[m]:.4g}, {e[m + 1]:.4g}]" for m in range(self.n_classes)
        )


def bin_continuous(values, rule: BinningRule = BinningRule(), name: str = "x") -> ConditioningColumn:
    fitted = rule if rule.edges else rule.fitted(values)
    return ConditioningColumn(name, fitted.labels(), fitted.classify(values))


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Joint and marginal relative frequencies of two conditioning columns."""

    counts: np.ndarray
    n: int

    @classmethod
    def from_counts(cls, counts) -> "ProbTable":
        counts = np.array(counts, dtype=np.int64)
        if counts.ndim != 2 or np.any(counts < 0):
            raise ParameterError("counts must be a nonnegative matrix")
        n = int(counts.sum())
        if n == 0:
            raise DataError("contingency table has no records", ReasonCode.EMPTY_TARGET)
        counts.setflags(write=False)
        return cls(counts, n)

    @property
    def joint(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def row_marg(self) -> np.ndarray:
        return self.counts.sum(axis=1) / self.n

    @property
    def col_marg(self) -> np.ndarray:
        return self.counts.sum(axis=0) / self.n

    def exact_joint(self) -> List[List[Fraction]]:
        return [[Fraction(int(c), self.n) for c in row] for row in self.counts]

    def exact_row_marg(self) -> List[Fraction]:
        return [Fraction(int(c), self.n) for c in self.counts.sum(axis=1)]

    def exact_col_marg(self) -> List[Fraction]:
        return [Fraction(int(c), self.n) for c in self.counts.sum(axis=0)]


def joint_probabilities(ds: Dataset) -> ProbTable:
    if ds.cond_x is None or ds.cond_y is None:
        raise ParameterError("joint probabilities need two conditioning columns")
    counts = np.zeros((len(ds.cond_x.levels), len(ds.cond_y.levels)), dtype=np.int64)
    np.add.at(counts, (ds.cond_x.codes, ds.cond_y.codes), 1)
    return ProbTable.from_counts(counts)


def format_prob_table(table: ProbTable, row_labels: Sequence[str], col_labels: Sequence[str]) -> str:
    """Plain-text contingency table with margins, three decimals."""
    header = [""] + list(col_labels) + [MARGIN_LABEL]
    rows = [header]
    for i, label in enumerate(row_labels):
        rows.append([label] + [f"{p:.3f}" for p in table.joint[i]] + [f"{table.row_marg[i]:.3f}"])
    rows.append([MARGIN_LABEL] + [f"{p:.3f}" for p in table.col_marg] + ["1.000"])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)


class CellRole(str, Enum):
    JOINT = "joint"
    ROW_MARGINAL = "row-marginal"
    COL_MARGINAL = "col-marginal"
    GRAND_MARGINAL = "grand-marginal"


@dataclass(frozen=True, eq=False)
class TableCell:
    row: int
    col: int
    role: CellRole
    probability: float
    diameter: float
    count: int
    grid: Optional[DensityGrid] = None
    sample: Optional[Sample] = None
    sparse: bool = False

    @property
    def empty(self) -> bool:
        return self.count == 0


@dataclass(frozen=True)
class TableConfig:
    coverage: float = DEFAULT_COVERAGE
    lower_known: Optional[float] = None
    bounds: Optional[SupportBounds] = None
    n_bins: int = DEFAULT_BINS
    bandwidth: Optional[float] = None
    k: float = DEFAULT_K
    d_base: float = DEFAULT_D_BASE
    base: HclColor = DEFAULT_BASE
    base2: HclColor = DEFAULT_BASE_2
    gamma: float = DEFAULT_GAMMA
    min_count: int = DEFAULT_MIN_COUNT
    workers: int = 1

    def __post_init__(self):
        if self.min_count < 1:
            raise ParameterError(f"min_count must be at least 1, got {self.min_count}")
        if self.workers < 1:
            raise ParameterError(f"workers must be at least 1, got {self.workers}")


@dataclass(frozen=True, eq=False)
class HddsTable:
    cells: Tuple[Tuple[TableCell, ...], ...]
    ctx: ShadingContext
    bounds: SupportBounds
    k: float
    d_base: float
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    probabilities: Optional[ProbTable] = None
    source_label: str = ""
    target_name: str = "z"

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.cells[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    def cell(self, i: int, j: int) -> TableCell:
        return self.cells[i][j]

    @property
    def corner(self) -> TableCell:
        return self.cells[-1][-1]

    def strip(self, i: int, j: int, orientation: Orientation = Orientation.UP) -> Optional[HalfDiskStrip]:
        """Tessellated half disk of one cell, or None for empty and sparse cells."""
        cell = self.cell(i, j)
        if cell.grid is None:
            return None
        return tessellate(cell.grid, self.ctx, cell.diameter, orientation)


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Two HDDS tables over the same levels and support, drawn as disk pairs."""

    top: HddsTable
    bottom: HddsTable

    @property
    def bounds(self) -> SupportBounds:
        return self.top.bounds

    @property
    def shape(self) -> Tuple[int, int]:
        return self.top.shape

    def pair(self, i: int, j: int) -> Tuple[Optional[HalfDiskStrip], Optional[HalfDiskStrip]]:
        return self.top.strip(i, j, Orientation.UP), self.bottom.strip(i, j, Orientation.DOWN)


# (row, col, role, record mask, probability)
_CellPlan = Tuple[int, int, CellRole, np.ndarray, float]


def _cell_plan(ds: Dataset) -> Tuple[List[_CellPlan], Optional[ProbTable], Tuple[int, int]]:
    x = ds.cond_x
    n_x = len(x.levels)
    everything = np.ones(ds.n, dtype=bool)
    plan: List[_CellPlan] = []
    if ds.cond_y is None:
        row_marg = x.counts() / ds.n
        for i in range(n_x):
            plan.append((i, 0, CellRole.ROW_MARGINAL, x.codes == i, float(row_marg[i])))
        plan.append((n_x, 0, CellRole.GRAND_MARGINAL, everything, 1.0))
        return plan, None, (n_x + 1, 1)

    y = ds.cond_y
    n_y = len(y.levels)
    probs = joint_probabilities(ds)
    for i in range(n_x):
        for j in range(n_y):
            plan.append((i, j, CellRole.JOINT, (x.codes == i) & (y.codes == j), float(probs.joint[i, j])))
        plan.append((i, n_y, CellRole.ROW_MARGINAL, x.codes == i, float(probs.row_marg[i])))
    for j in range(n_y):
        plan.append((n_x, j, CellRole.COL_MARGINAL, y.codes == j, float(probs.col_marg[j])))
    plan.append((n_x, n_y, CellRole.GRAND_MARGINAL, everything, 1.0))
    return plan, probs, (n_x + 1, n_y + 1)


def _estimate_cell(ds: Dataset, item: _CellPlan, cfg: TableConfig, bounds: SupportBounds) -> TableCell:
    i, j, role, mask, probability = item
    count = int(mask.sum())
    diameter = diameter_scale(probability, cfg.k, cfg.d_base)
    if count == 0:
        return TableCell(i, j, role, probability, diameter, 0)

    sample = Sample(ds.target.values[mask], ds.target.kind)
    if count < cfg.min_count:
        logger.info("cell (%d, %d) has %d records, drawing dots only", i, j, count)
        return TableCell(i, j, role, probability, diameter, count, sample=sample, sparse=True)
    try:
        grid = estimate(sample, bounds, cfg.n_bins, cfg.bandwidth)
    except DataError as exc:
        logger.warning("cell (%d, %d): %s; drawing dots only", i, j, exc)
        return TableCell(i, j, role, probability, diameter, count, sample=sample, sparse=True)
    return TableCell(i, j, role, probability, diameter, count, grid=grid, sample=sample)


def _assemble(ds: Dataset, cfg: TableConfig, bounds: SupportBounds, base: HclColor) -> HddsTable:
    if ds.cond_x is None:
        raise ParameterError("an HDDS table needs at least one conditioning column")
    plan, probs, (n_rows, n_cols) = _cell_plan(ds)

    def work(item: _CellPlan) -> TableCell:
        return _estimate_cell(ds, item, cfg, bounds)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            cells = list(pool.map(work, plan))
    else:
        cells = [work(item) for item in plan]

    grids = [cell.grid for cell in cells if cell.grid is not None]
    if not grids:
        raise DataError(
            f"no cell of '{ds.source_label or ds.target_name}' has {cfg.min_count} or more records",
            ReasonCode.EMPTY_TARGET,
        )
    ctx = make_context(grids, base, cfg.gamma)

    rows = tuple(tuple(cells[r * n_cols:(r + 1) * n_cols]) for r in range(n_rows))
    col_labels = ds.cond_y.levels + (MARGIN_LABEL,) if ds.cond_y is not None else (MARGIN_LABEL,)
    logger.debug("built %dx%d table for '%s', norm=%.6g", n_rows, n_cols, ds.source_label, ctx.norm)
    return HddsTable(
        cells=rows,
        ctx=ctx,
        bounds=bounds,
        k=cfg.k,
        d_base=cfg.d_base,
        row_labels=ds.cond_x.levels + (MARGIN_LABEL,),
        col_labels=col_labels,
        probabilities=probs,
        source_label=ds.source_label,
        target_name=ds.target_name,
    )


def build_table(ds: Dataset, cfg: TableConfig = TableConfig()) -> HddsTable:
    """Bounds come from the full target sample once and are shared by every cell."""
    bounds = resolve_bounds(ds.target, cfg.bounds, cfg.coverage, cfg.lower_known)
    return _assemble(ds, cfg, bounds, cfg.base)


def _aligned(a: Optional[ConditioningColumn], b: Optional[ConditioningColumn]) -> Optional[ConditioningColumn]:
    if a is None and b is None:
        return None
    if a is None or b is None:
        raise DataError("both sources need the same conditioning columns", ReasonCode.LEVEL_MISMATCH)
    if set(a.levels) != set(b.levels):
        only_a = [level for level in a.levels if level not in b.levels]
        only_b = [level for level in b.levels if level not in a.levels]
        raise DataError(
            f"conditioning levels of '{a.name}' differ: only in first source {only_a}, "
            f"only in second source {only_b}",
            ReasonCode.LEVEL_MISMATCH,
        )
    return b if b.levels == a.levels else b.reordered(a.levels)


def build_comparison(ds_a: Dataset, ds_b: Dataset, cfg: TableConfig = TableConfig()) -> ComparisonTable:
    """
    Two tables on pooled support bounds, one shading context per source.

    The second source is re-indexed to the first source's level order.
    """
    if ds_a.target.kind is not ds_b.target.kind:
        raise DataError("both sources need the same target kind", ReasonCode.LEVEL_MISMATCH)
    ds_b = replace(ds_b, cond_x=_aligned(ds_a.cond_x, ds_b.cond_x), cond_y=_aligned(ds_a.cond_y, ds_b.cond_y))
    pooled = Sample(np.concatenate([ds_a.target.values, ds_b.target.values]), ds_a.target.kind)
    bounds = resolve_bounds(pooled, cfg.bounds, cfg.coverage, cfg.lower_known)
    return ComparisonTable(
        top=_assemble(ds_a, cfg, bounds, cfg.base),
        bottom=_assemble(ds_b, cfg, bounds, cfg.base2),
    )


def compose_conditioning(ds: Dataset, extra: ConditioningColumn) -> Dataset:
    """Replace cond_y by the observed (y, w) pairs, ordered by y then w."""
    if len(extra) != ds.n:
        raise ParameterError(f"column '{extra.name}' has {len(extra)} records, dataset has {ds.n}")
    base = ds.cond_y
    if base is None:
        return replace(ds, cond_y=extra)
    width = len(extra.levels)
    pairs = base.codes * width + extra.codes
    observed = np.unique(pairs)
    levels = tuple(
        f"{base.levels[p // width]}{COMPOSITE_SEPARATOR}{extra.levels[p % width]}" for p in observed
    )
    column = ConditioningColumn(
        f"{base.name}{COMPOSITE_SEPARATOR}{extra.name}", levels, np.searchsorted(observed, pairs)
    )
    return replace(ds, cond_y=column)


def split_dataset(ds: Dataset, column: ConditioningColumn) -> Tuple[Dataset, Dataset]:
    """Split on a two-level column; each part is labelled with its level."""
    if len(column) != ds.n:
        raise ParameterError(f"column '{column.name}' has {len(column)} records, dataset has {ds.n}")
    if len(column.levels) != 2:
        raise DataError(
            f"split column '{column.name}' needs exactly 2 levels, found {len(column.levels)}",
            ReasonCode.LEVEL_MISMATCH,
        )
    parts = []
    for code, level in enumerate(column.levels):
        mask = column.codes == code
        if not mask.any():
            raise DataError(f"split level '{level}' has no records", ReasonCode.EMPTY_TARGET)
        parts.append(replace(ds.subset(mask), source_label=level))
    return parts[0], parts[1]
