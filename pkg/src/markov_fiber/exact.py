"""Fiber enumeration and exact conditional p-values.

Under a toric null model the conditional law of a table given ``A x = t`` is
``h(x) = C^-1 / prod_i x_i!`` on the fiber ``{x >= 0 : A x = t}``. Everything
here stays in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import (
    Configuration,
    ContingencyTable,
    ModelError,
    SufficientStat,
    as_stat,
    new_table,
    sufficient_stat,
)
from .report import TestReport
from .stats import StatisticKind, contribution_table, fit_null

DEFAULT_LIMIT = 5_000_000
_CHUNK = 65536


class FiberLimitError(RuntimeError):
    """Enumeration stopped after ``count`` elements exceeded ``limit``."""

    def __init__(self, count: int, limit: int):
        super().__init__(
            f"fiber has more than {limit} elements (stopped at {count}); "
            "use the mcmc strategy instead"
        )
        self.count = count
        self.limit = limit


def log_factorials(upto: int) -> np.ndarray:
    """``lf[k] = log(k!)`` for ``k = 0..upto``."""
    lf = np.zeros(upto + 1)
    if upto >= 2:
        lf[2:] = np.cumsum(np.log(np.arange(2, upto + 1, dtype=float)))
    return lf


def log_weight(table: ContingencyTable) -> float:
    """-sum log(x_i!): the unnormalized log conditional probability."""
    lf = log_factorials(max(table.cells, default=0))
    return -float(sum(lf[c] for c in table.cells))


def logsumexp(v: np.ndarray) -> float:
    if v.size == 0:
        return -math.inf
    top = float(v.max())
    return top + math.log(float(np.exp(v - top).sum()))


@dataclass(frozen=True, eq=False)
class Fiber:
    config: Configuration
    t: SufficientStat
    cells: np.ndarray  # (size, nu) int64, lexicographically ascending
    log_weights: np.ndarray
    log_norm: float

    @property
    def size(self) -> int:
        return self.cells.shape[0]

    def __len__(self):
        return self.size

    @property
    def shape(self) -> tuple[int, ...]:
        return self.config.table_shape

    @property
    def elements(self) -> list[ContingencyTable]:
        return [ContingencyTable(self.shape, tuple(int(v) for v in row)) for row in self.cells]

    @property
    def probs(self) -> np.ndarray:
        return fiber_probabilities(self)

    def index_of(self, table: ContingencyTable) -> int:
        """Position of ``table`` in the fiber, by binary search on the sorted rows."""
        key = tuple(table.cells)
        lo, hi = 0, self.size
        while lo < hi:
            mid = (lo + hi) // 2
            if tuple(self.cells[mid]) < key:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.size and tuple(self.cells[lo]) == key:
            return lo
        raise KeyError("table is not in this fiber")

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for row, lw in zip(self.cells, self.log_weights):
                fh.write(json.dumps({"cells": row.tolist(), "log_weight": float(lw)}) + "\n")


def read_fiber_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _enumerate(a: np.ndarray, t: Sequence[int], limit: int | None):
    """Depth-first search over cells in flat order; yields chunks of rows."""
    d, nu = a.shape
    cols = [[(i, int(a[i, j])) for i in range(d) if a[i, j]] for j in range(nu)]
    last = {}
    for j in range(nu):
        for i, _ in cols[j]:
            last[i] = j
    # rows whose last supporting column is j: once j is set they must be exhausted
    closing = [[(i, c) for i, c in cols[j] if last[i] == j] for j in range(nu)]
    resid = [int(v) for v in t]
    x = [0] * nu
    out: list[tuple] = []
    count = 0

    def rec(j):
        nonlocal count
        if j == nu:
            count += 1
            if limit is not None and count > limit:
                raise FiberLimitError(count, limit)
            out.append(tuple(x))
            return
        col = cols[j]
        hi = min(resid[i] // c for i, c in col)
        if closing[j]:
            i0, c0 = closing[j][0]
            if resid[i0] % c0:
                return
            v = resid[i0] // c0
            if v > hi:
                return
            for i, c in closing[j][1:]:
                if resid[i] != v * c:
                    return
            lo = v
        else:
            lo, v = 0, hi
        for val in range(lo, v + 1):
            x[j] = val
            for i, c in col:
                resid[i] -= val * c
            rec(j + 1)
            for i, c in col:
                resid[i] += val * c
        x[j] = 0

    rec(0)
    return out


def enumerate_fiber(config: Configuration, t, limit: int | None = DEFAULT_LIMIT) -> Fiber:
    """All nonnegative integer tables with ``A x = t``, in ascending lexicographic order.

    An unreachable ``t`` gives an empty fiber. Raises FiberLimitError if more
    than ``limit`` solutions exist.
    """
    t = as_stat(t)
    if len(t) != config.d:
        raise ModelError(f"statistic has length {len(t)}, configuration has {config.d} rows")
    if any(v < 0 for v in t):
        raise ModelError("sufficient statistic must be nonnegative")
    rows = _enumerate(config.entries, t.t, limit)
    cells = np.array(rows, dtype=np.int64).reshape(len(rows), config.nu)
    if cells.size:
        lf = log_factorials(int(cells.max()))
        lw = -lf[cells].sum(axis=1)
    else:
        lw = np.zeros(0)
    return Fiber(config, t, cells, lw, logsumexp(lw))


def fiber_probabilities(fiber: Fiber) -> np.ndarray:
    """Hypergeometric probabilities h(x) of the fiber elements."""
    if fiber.size == 0:
        raise ModelError("empty fiber has no distribution")
    return np.exp(fiber.log_weights - fiber.log_norm)


def fiber_statistics(fiber: Fiber, kind, fitted=None) -> np.ndarray:
    """Statistic value for every fiber element, sharing one null fit."""
    if fiber.size == 0:
        raise ModelError("empty fiber")
    if fitted is None:
        fitted = fit_null(fiber.config, new_table(fiber.shape, fiber.cells[0].tolist()))
    c = contribution_table(kind, fitted, int(fiber.cells.max()))
    return c[np.arange(fiber.cells.shape[1]), fiber.cells].sum(axis=1)


def at_least(values, observed: float, rtol: float = 1e-12):
    """Inclusive ``values >= observed`` with a relative tie tolerance."""
    return np.asarray(values) >= observed - rtol * max(abs(observed), 1.0)


def exact_p_value(config: Configuration, observed: ContingencyTable, statistic="pearson",
                  limit: int | None = DEFAULT_LIMIT) -> TestReport:
    """Conditional p-value sum over the fiber of h(x) * 1[stat(x) >= stat(observed)]."""
    kind = StatisticKind.parse(statistic)
    t = sufficient_stat(config, observed)
    fiber = enumerate_fiber(config, t, limit)
    fitted = fit_null(config, observed)
    stats = fiber_statistics(fiber, kind, fitted)
    obs = stats[fiber.index_of(observed)]
    probs = fiber_probabilities(fiber)
    p = float(probs[at_least(stats, obs)].sum())
    return TestReport(
        strategy="exact",
        statistic_kind=kind.value,
        statistic=float(obs),
        p_value=min(p, 1.0),
        fiber_size=fiber.size,
        diagnostics={"log_norm": fiber.log_norm},
    )


def exact_percentiles(fiber: Fiber, statistic, levels: Iterable[float], fitted=None) -> list[float]:
    """Smallest statistic value s with P(stat <= s) >= q, for each level q."""
    levels = list(levels)
    if any(not 0.0 < q < 1.0 for q in levels):
        raise ValueError("levels must lie in (0, 1)")
    stats = fiber_statistics(fiber, statistic, fitted)
    probs = fiber_probabilities(fiber)
    order = np.argsort(stats, kind="stable")
    s, p = stats[order], probs[order]
    cdf = np.cumsum(p)
    # fold near-equal values so each distinct statistic gets its full mass
    ends = np.flatnonzero(np.append(np.diff(s) > 1e-12 * np.maximum(np.abs(s[1:]), 1.0), True))
    out = []
    for q in levels:
        k = int(np.searchsorted(cdf[ends], q - 1e-12))
        out.append(float(s[ends[min(k, ends.size - 1)]]))
    return out
