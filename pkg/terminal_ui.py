"""Terminal color + panel helpers for the diagnostic stream."""

from __future__ import annotations

import sys
from typing import Optional, TextIO


class Colors:
    RESET = "\033[0m"
    CYAN = "\033[96m"
    GREEN = "\033[92m"
    YELLOW = "\033[93m"
    RED = "\033[91m"


def _use_color(stream: TextIO) -> bool:
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


class TerminalUI:
    """Everything here writes to stderr; stdout is reserved for the SVG payload."""

    @staticmethod
    def print_panel(text: str, title: str = "", color: str = Colors.CYAN, stream: Optional[TextIO] = None) -> None:
        stream = stream or sys.stderr
        if title:
            if _use_color(stream):
                print(f"{color}== {title} =={Colors.RESET}", file=stream)
            else:
                print(f"== {title} ==", file=stream)
        print(text, file=stream)

    @staticmethod
    def status(message: str, level: str = "OK", stream: Optional[TextIO] = None) -> None:
        stream = stream or sys.stderr
        palette = {"OK": Colors.GREEN, "WARN": Colors.YELLOW, "ERR": Colors.RED}
        if _use_color(stream):
            color = palette.get(level, Colors.CYAN)
            print(f"{color}[{level}] {message}{Colors.RESET}", file=stream)
        else:
            print(f"[{level}] {message}", file=stream)
