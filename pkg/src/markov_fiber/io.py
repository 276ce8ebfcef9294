"""Plain-text file formats: tables, configurations, move sets, fibers, traces."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .exact import Fiber, read_fiber_jsonl  # noqa: F401  (re-exported)
from .model import Configuration, ContingencyTable, ModelError, custom_config, new_table
from .toric import MoveSet


def read_table(path) -> ContingencyTable:
    """Read a table from JSON ``{"shape": [...], "cells": [...]}`` or a 2-way CSV.

    CSV rows are levels of the first factor. Files ending in ``.csv`` are read
    as CSV; anything else must be JSON.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(text.splitlines()) if any(c.strip() for c in r)]
        try:
            data = [[int(c) for c in r] for r in rows]
        except ValueError as exc:
            raise ModelError(f"{path}: non-integer CSV entry ({exc})") from None
        if not data or len({len(r) for r in data}) != 1:
            raise ModelError(f"{path}: CSV rows must be nonempty and equally long")
        return new_table((len(data), len(data[0])), [c for r in data for c in r])
    try:
        obj = json.loads(text)
        shape, cells = obj["shape"], obj["cells"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelError(f"{path}: expected JSON with 'shape' and 'cells' ({exc})") from None
    return new_table(shape, cells)


def write_table(table: ContingencyTable, path) -> None:
    Path(path).write_text(json.dumps({"shape": list(table.shape), "cells": list(table.cells)}) + "\n")


def _int_rows(text: str, what: str) -> list[list[int]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(v) for v in line.split()])
        except ValueError:
            raise ModelError(f"{what} line {lineno}: expected integers") from None
    return rows


def read_configuration(path, table_shape=None) -> Configuration:
    """One matrix row per line, entries separated by whitespace."""
    rows = _int_rows(Path(path).read_text(), str(path))
    if not rows or len({len(r) for r in rows}) != 1:
        raise ModelError(f"{path}: configuration rows must be nonempty and equally long")
    return custom_config(rows, table_shape)


def write_configuration(config: Configuration, path) -> None:
    Path(path).write_text("".join(" ".join(str(int(v)) for v in row) + "\n" for row in config.entries))


def format_moves(moves: MoveSet) -> str:
    head = f"# config {moves.config.d}x{moves.config.nu}\n"
    return head + "".join(" ".join(str(v) for v in m.z) + "\n" for m in moves)


def write_moves(moves: MoveSet, path) -> None:
    Path(path).write_text(format_moves(moves))


def read_moves(path, config: Configuration) -> MoveSet:
    """Parse a move-set file and check it against ``config``.

    The header must match the configuration's dimensions and every move must
    lie in the integer kernel of A.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 3 or header[:2] != ["#", "config"]:
        raise ModelError(f"{path}: missing '# config <d>x<nu>' header")
    want = f"{config.d}x{config.nu}"
    if header[2] != want:
        raise ModelError(f"{path}: header says {header[2]}, configuration is {want}")
    rows = _int_rows("\n".join(lines[1:]), str(path))
    return MoveSet(config, [tuple(r) for r in rows])


def write_fiber(fiber: Fiber, path) -> None:
    """JSON lines, one ``{"cells": [...], "log_weight": w}`` object per element."""
    fiber.to_jsonl(path)


def write_trace(values: Iterable[float], path) -> None:
    # repr round-trips doubles exactly
    with open(path, "w") as fh:
        for v in values:
            fh.write(repr(float(v)) + "\n")


def read_trace(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()])
