#!/usr/bin/env python3
"""
HDDS CLI Tool
Half-disk density strips, disk pairs and HDDS tables from CSV files, as SVG.

Subcommands:
    plot           one strip of one target column
    compare        two strips stacked into a disk (two files, or --split)
    table          HDDS table conditioned on --by-x [--by-y] [--compose]
    table-compare  two HDDS tables drawn as disk pairs
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from artifact_writer import write_artifact
from color import make_context
from density import Sample, estimate, resolve_bounds
from errors import EXIT_CODES, HddsError, UsageError
from geometry import Orientation, tessellate
from ingest import load_sources
from render import (
    FigureDoc,
    RenderOptions,
    comparison_figure,
    pair_figure,
    render_dots,
    serialize,
    strip_figure,
    table_figure,
)
from run_config import RunConfig, resolve_config
from table import build_comparison, build_table, format_prob_table
from terminal_ui import TerminalUI

logger = logging.getLogger("hdds.cli")

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"


def _get_version() -> str:
    try:
        return json.loads((Path(__file__).parent / "VERSION.json").read_text())["version"]
    except (OSError, ValueError, KeyError):
        return "0.0.0"


__version__ = _get_version()


def configure_logging(verbosity: int = 0, quiet: bool = False) -> None:
    """One stderr handler on the 'hdds' logger; -v for DEBUG, -q for ERROR."""
    level = logging.ERROR if quiet else (logging.DEBUG if verbosity > 0 else logging.WARNING)
    root = logging.getLogger("hdds")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


def _options(config: RunConfig) -> RenderOptions:
    return RenderOptions(show_median=config.median, show_dots=config.dots, title=config.title)


def cmd_plot(config: RunConfig) -> FigureDoc:
    [ds] = load_sources(config)
    base, _ = config.base_colors()
    bounds = resolve_bounds(ds.target, config.support(), config.coverage, config.lower)
    grid = estimate(ds.target, bounds, config.bins, config.bandwidth)
    ctx = make_context([grid], base, config.gamma)
    strip = tessellate(grid, ctx, config.d_base, Orientation.UP, config.marks)
    overlay = render_dots(ds.target, strip, config.seed) if config.dots else None
    density_strip = (grid, ctx) if config.with_ds else None
    return strip_figure(strip, _options(config), overlay, density_strip, config.seed)


def cmd_compare(config: RunConfig) -> FigureDoc:
    first, second = load_sources(config)
    pooled = Sample(np.concatenate([first.target.values, second.target.values]), first.target.kind)
    bounds = resolve_bounds(pooled, config.support(), config.coverage, config.lower)
    grids = [estimate(ds.target, bounds, config.bins, config.bandwidth) for ds in (first, second)]
    bases = config.base_colors()
    if config.normalize == "shared":
        contexts = [make_context(grids, base, config.gamma) for base in bases]
    else:
        contexts = [make_context([grid], base, config.gamma) for grid, base in zip(grids, bases)]

    top = tessellate(grids[0], contexts[0], config.d_base, Orientation.UP, config.marks)
    bottom = tessellate(grids[1], contexts[1], config.d_base, Orientation.DOWN, config.marks)
    overlays = (None, None)
    if config.dots:
        overlays = (render_dots(first.target, top, config.seed), render_dots(second.target, bottom, config.seed + 1))
    labels = (first.source_label, second.source_label)
    return pair_figure(top, bottom, _options(config), overlays, labels, config.seed)


def cmd_table(config: RunConfig) -> FigureDoc:
    [ds] = load_sources(config)
    table = build_table(ds, config.table_config())
    if config.summary and table.probabilities is not None:
        TerminalUI.print_panel(
            format_prob_table(table.probabilities, table.row_labels[:-1], table.col_labels[:-1]),
            title=f"{ds.cond_x.name} x {ds.cond_y.name} ({ds.n} records)",
        )
    return table_figure(table, _options(config), config.seed)


def cmd_table_compare(config: RunConfig) -> FigureDoc:
    first, second = load_sources(config)
    comparison = build_comparison(first, second, config.table_config())
    if config.summary:
        for part in (comparison.top, comparison.bottom):
            if part.probabilities is not None:
                TerminalUI.print_panel(
                    format_prob_table(part.probabilities, part.row_labels[:-1], part.col_labels[:-1]),
                    title=part.source_label,
                )
    return comparison_figure(comparison, _options(config), config.seed)


COMMANDS = {
    "plot": cmd_plot,
    "compare": cmd_compare,
    "table": cmd_table,
    "table-compare": cmd_table_compare,
}


def emit(payload: bytes, out: Optional[str]) -> None:
    """SVG to stdout when no --out (or '-'), otherwise an atomic file write."""
    if not out or out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    receipt = write_artifact(Path(out), payload)
    TerminalUI.status(f"wrote {receipt['path']} ({receipt['bytes']} bytes, sha256 {receipt['sha256'][:12]})", "OK")


def run(command: str, config: RunConfig) -> int:
    try:
        config.validate(command)
        doc = COMMANDS[command](config)
        emit(serialize(doc), config.out)
    except HddsError as exc:
        logger.debug("%s failed", command, exc_info=True)
        TerminalUI.status(f"{command}: {exc}", "ERR")
        return exc.exit_code
    return EXIT_CODES["OK"]


class HddsArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors raised as UsageError (exit 1) instead of exit 2."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _type_hint(text: str) -> tuple:
    column, sep, kind = text.partition("=")
    if not sep or not column or not kind:
        raise argparse.ArgumentTypeError(f"expected COLUMN=KIND, got {text!r}")
    return column.strip(), kind.strip()


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = HddsArgumentParser(add_help=False, argument_default=S)
    common.add_argument("inputs", nargs="*", default=[], help="input CSV file(s)")
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--target", help="target column")
    common.add_argument("--by-x", dest="by_x", help="row conditioning column")
    common.add_argument("--by-y", dest="by_y", help="column conditioning column")
    common.add_argument("--compose", help="extra column combined with --by-y")
    common.add_argument("--split", help="two-level column splitting one file into two sources")
    common.add_argument("--type", dest="types", action="append", type=_type_hint,
                        help="COLUMN=continuous|discrete|categorical (repeatable)")
    common.add_argument("--label", dest="labels", help="source labels A,B")
    common.add_argument("--classes", type=int, help="percentile classes for continuous conditioners")
    common.add_argument("--coverage", type=float, help="central share kept inside the bounds")
    common.add_argument("--lower", type=float, help="known lower bound of the support")
    common.add_argument("--bounds", help="explicit support LO,HI")
    common.add_argument("--bins", type=int, help="sectors per continuous strip")
    common.add_argument("--bandwidth", type=float, help="kernel standard deviation")
    common.add_argument("--gamma", type=float, help="gamma applied to the mixing weight")
    common.add_argument("--color", help="base color H,C,L")
    common.add_argument("--color2", help="second base color H,C,L")
    common.add_argument("--k", type=float, help="diameter exponent")
    common.add_argument("--d-base", dest="d_base", type=float, help="baseline diameter")
    common.add_argument("--seed", type=int, help="dot placement seed")
    common.add_argument("--dots", action="store_true", help="draw data dots")
    common.add_argument("--median", action="store_true", help="draw the median tick")
    common.add_argument("--mark", dest="marks", action="append", type=float, help="reference tick (repeatable)")
    common.add_argument("--normalize", choices=("shared", "mode"), help="compare: one context or one per strip")
    common.add_argument("--with-ds", dest="with_ds", action="store_true", help="plot: add a density strip")
    common.add_argument("--min-count", dest="min_count", type=int, help="records below which a cell shows dots only")
    common.add_argument("--workers", type=int, help="threads for per-cell estimation")
    common.add_argument("--title", help="figure title")
    common.add_argument("--summary", action="store_true", help="print the contingency table on stderr")
    common.add_argument("--out", help="output SVG path ('-' for stdout)")
    common.add_argument("-v", "--verbose", action="count", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="errors only")

    parser = HddsArgumentParser(prog="hdds", description="Half-disk density strips and HDDS tables as SVG.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, help_text in (
        ("plot", "one half-disk density strip"),
        ("compare", "two strips stacked into a disk"),
        ("table", "HDDS table"),
        ("table-compare", "two HDDS tables as disk pairs"),
    ):
        sub.add_parser(name, parents=[common], help=help_text, argument_default=S)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except UsageError as exc:
        TerminalUI.status(str(exc), "ERR")
        return exc.exit_code

    command = args.pop("command")
    if not args.get("inputs"):
        args.pop("inputs", None)
    configure_logging(args.pop("verbose", 0), args.pop("quiet", False))
    config_path = args.pop("config", None)
    if "types" in args:
        args["types"] = dict(args["types"])
    try:
        config = resolve_config(args, config_path)
    except HddsError as exc:
        TerminalUI.status(f"{command}: {exc}", "ERR")
        return exc.exit_code
    return run(command, config)


if __name__ == "__main__":
    sys.exit(main())
