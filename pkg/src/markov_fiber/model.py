"""Contingency tables, configuration matrices and sufficient statistics.

Cells are stored flat in row-major order (last factor varies fastest), so a
3x3 table is ``(x11, x12, x13, x21, ..., x33)``. The same order fixes the
column order of every configuration matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INT64_MAX = 2**63 - 1


class ModelError(ValueError):
    """Invalid table, configuration, or mismatched dimensions."""


@dataclass(frozen=True)
class ContingencyTable:
    shape: tuple[int, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if len(self.cells) != math.prod(self.shape):
            raise ModelError(
                f"shape {self.shape} needs {math.prod(self.shape)} cells, got {len(self.cells)}"
            )

    @property
    def n(self) -> int:
        return sum(self.cells)

    @property
    def nu(self) -> int:
        return len(self.cells)

    def as_array(self) -> np.ndarray:
        """Cells reshaped to ``shape`` as an int64 array."""
        return np.array(self.cells, dtype=np.int64).reshape(self.shape)

    def __str__(self):
        return np.array2string(self.as_array())


def new_table(shape: Sequence[int], cells: Iterable[int]) -> ContingencyTable:
    """Build a table from its shape and flat row-major cell counts."""
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise ModelError(f"shape entries must be positive, got {shape}")
    cells = tuple(int(c) for c in cells)
    if any(c < 0 for c in cells):
        raise ModelError("cell counts must be nonnegative")
    if any(c > INT64_MAX for c in cells) or sum(cells) > INT64_MAX:
        raise ModelError("cell counts overflow 64-bit range")
    return ContingencyTable(shape, cells)


def table_from_array(arr) -> ContingencyTable:
    arr = np.asarray(arr)
    return new_table(arr.shape, arr.ravel().tolist())


@dataclass(frozen=True, eq=False)
class Configuration:
    """A d x nu nonnegative integer matrix A defining the statistic t = A x.

    ``table_shape`` is the shape of the tables the columns index; for custom
    matrices without one it defaults to ``(nu,)``.
    """

    entries: np.ndarray
    table_shape: tuple[int, ...]
    name: str = "custom"
    _rows: tuple = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "_rows", tuple(tuple(int(v) for v in r) for r in a))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def nu(self) -> int:
        return self.entries.shape[1]

    def cell_label(self, j: int) -> tuple[int, ...]:
        """Zero-based multi-index of flat cell ``j``."""
        return tuple(int(i) for i in np.unravel_index(j, self.table_shape))

    def cell_index(self, label: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(label), self.table_shape))

    def is_zero_one(self) -> bool:
        return bool(np.isin(self.entries, (0, 1)).all())

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._rows == other._rows and self.table_shape == other.table_shape

    def __hash__(self):
        return hash((self._rows, self.table_shape))


@dataclass(frozen=True)
class SufficientStat:
    t: tuple[int, ...]

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        return iter(self.t)

    def as_array(self) -> np.ndarray:
        return np.array(self.t, dtype=np.int64)


def as_stat(t) -> SufficientStat:
    if isinstance(t, SufficientStat):
        return t
    return SufficientStat(tuple(int(v) for v in t))


def _check_matrix(matrix) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.size == 0:
        raise ModelError("configuration must be a nonempty 2-d matrix")
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise ModelError("configuration entries must be integers")
    a = a.astype(np.int64)
    if (a < 0).any():
        raise ModelError("configuration entries must be nonnegative")
    zero = np.flatnonzero(a.sum(axis=0) == 0)
    if zero.size:
        raise ModelError(f"configuration has zero column(s) {zero.tolist()}")
    return a


def custom_config(matrix, table_shape: Sequence[int] | None = None) -> Configuration:
    a = _check_matrix(matrix)
    shape = tuple(table_shape) if table_shape is not None else (a.shape[1],)
    if math.prod(shape) != a.shape[1]:
        raise ModelError(f"table shape {shape} does not match {a.shape[1]} columns")
    return Configuration(a, shape)


def independence_config(I: int, J: int) -> Configuration:
    """Row sums then column sums of an I x J table."""
    if I < 2 or J < 2:
        raise ModelError("independence model needs I, J >= 2")
    a = np.zeros((I + J, I * J), dtype=np.int64)
    for i in range(I):
        for j in range(J):
            a[i, i * J + j] = 1
            a[I + j, i * J + j] = 1
    return Configuration(a, (I, J), "independence")


def no_three_factor_config(I: int, J: int, K: int) -> Configuration:
    """All three two-way marginals of an I x J x K table.

    Rows come in (ij), (ik), (jk) blocks, each in lexicographic order.
    """
    if min(I, J, K) < 2:
        raise ModelError("no-three-factor model needs I, J, K >= 2")
    a = np.zeros((I * J + I * K + J * K, I * J * K), dtype=np.int64)
    for i in range(I):
        for j in range(J):
            for k in range(K):
                col = (i * J + j) * K + k
                a[i * J + j, col] = 1
                a[I * J + i * K + k, col] = 1
                a[I * J + I * K + j * K + k, col] = 1
    return Configuration(a, (I, J, K), "n3f")


def marginal_config(shape: Sequence[int], margins: Sequence[Sequence[int]]) -> Configuration:
    """Hierarchical log-linear configuration from a list of marginal axis sets.

    ``marginal_config((3, 3), [(0,), (1,)])`` equals ``independence_config(3, 3)``.
    """
    shape = tuple(shape)
    nu = math.prod(shape)
    labels = list(np.ndindex(*shape))
    blocks = []
    for axes in margins:
        axes = tuple(axes)
        sub = [shape[a] for a in axes]
        block = np.zeros((math.prod(sub), nu), dtype=np.int64)
        for col, lab in enumerate(labels):
            row = np.ravel_multi_index(tuple(lab[a] for a in axes), sub) if axes else 0
            block[row, col] = 1
        blocks.append(block)
    return custom_config(np.vstack(blocks), shape)


def sufficient_stat(config: Configuration, table: ContingencyTable) -> SufficientStat:
    """t = A x, computed in exact integer arithmetic with a 64-bit overflow check."""
    if config.nu != table.nu:
        raise ModelError(f"configuration has {config.nu} columns, table has {table.nu} cells")
    x = table.cells
    t = tuple(sum(a * v for a, v in zip(row, x) if a) for row in config._rows)
    if any(v > INT64_MAX for v in t):
        raise ModelError("sufficient statistic overflows 64-bit range")
    return SufficientStat(t)


def marginal_blocks(config: Configuration) -> list[list[int]]:
    """Partition the rows of a 0/1 configuration into blocks of disjoint support.

    Each block's rows have disjoint supports covering every cell exactly once,
    which is what iterative proportional fitting cycles over. Raises if the
    rows cannot be grouped that way.
    """
    if not config.is_zero_one():
        raise ModelError("marginal blocks need a 0/1 configuration")
    a = config.entries
    blocks: list[list[int]] = []
    cover = np.zeros(config.nu, dtype=np.int64)
    current: list[int] = []
    for r in range(config.d):
        if (cover + a[r] > 1).any():
            raise ModelError(f"row {r} overlaps an unfinished marginal block")
        cover = cover + a[r]
        current.append(r)
        if (cover == 1).all():
            blocks.append(current)
            current = []
            cover = np.zeros(config.nu, dtype=np.int64)
    if current:
        raise ModelError("configuration rows do not partition into marginal blocks")
    return blocks

