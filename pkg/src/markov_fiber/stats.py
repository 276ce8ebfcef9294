"""Goodness-of-fit statistics, null-model fitted values and chi-square tails."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Configuration,
    ContingencyTable,
    ModelError,
    marginal_blocks,
    sufficient_stat,
)


class StatisticKind(str, enum.Enum):
    PEARSON = "pearson"
    LRT = "lrt"

    @classmethod
    def parse(cls, value) -> "StatisticKind":
        if isinstance(value, cls):
            return value
        aliases = {"pearson": cls.PEARSON, "pearson-chi2": cls.PEARSON, "chi2": cls.PEARSON,
                   "lrt": cls.LRT, "likelihood-ratio": cls.LRT, "g2": cls.LRT}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown statistic {value!r}") from None


class ConvergenceError(RuntimeError):
    def __init__(self, message, discrepancy):
        super().__init__(message)
        self.discrepancy = discrepancy


@dataclass(frozen=True, eq=False)
class FittedTable:
    shape: tuple[int, ...]
    values: np.ndarray
    model_tag: str
    discrepancies: tuple[float, ...] = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.shape)


# --- fitted values -------------------------------------------------------

def fitted_independence(table: ContingencyTable) -> FittedTable:
    """m_ij = x_i+ x_+j / n for a two-way table."""
    if len(table.shape) != 2:
        raise ModelError("independence fit needs a two-way table")
    n = table.n
    if n == 0:
        raise ModelError("cannot fit an empty table")
    x = table.as_array()
    m = np.outer(x.sum(axis=1), x.sum(axis=0)) / n
    return FittedTable(table.shape, m.ravel(), "independence")


def ipf_fit(table: ContingencyTable, config: Configuration,
            tol: float = 1e-10, max_iter: int = 5000) -> FittedTable:
    """Iterative proportional scaling to the marginals A x.

    Cycles over the marginal blocks of ``config`` starting from the uniform
    table. Converges when the L-infinity gap between A m and A x drops below
    ``tol`` after a full cycle.
    """
    if table.n == 0:
        raise ModelError("cannot fit an empty table")
    if config.nu != table.nu:
        raise ModelError("table and configuration sizes differ")
    blocks = marginal_blocks(config)
    a = config.entries.astype(float)
    t = np.array(sufficient_stat(config, table).t, dtype=float)
    supports = [[np.flatnonzero(config.entries[r]) for r in block] for block in blocks]
    m = np.ones(config.nu)
    history = []
    for _ in range(max_iter):
        for block, rows in zip(blocks, supports):
            for r, cells in zip(block, rows):
                s = m[cells].sum()
                if s > 0:
                    m[cells] *= t[r] / s
        gap = float(np.max(np.abs(a @ m - t)))
        history.append(gap)
        if gap < tol:
            return FittedTable(table.shape, m, config.name, tuple(history))
    raise ConvergenceError(
        f"IPF did not converge in {max_iter} cycles (discrepancy {history[-1]:.3g})",
        history[-1],
    )


def is_two_way_independence(config: Configuration) -> bool:
    shape = config.table_shape
    if len(shape) != 2 or min(shape) < 2:
        return False
    from .model import independence_config

    return config == independence_config(*shape)


def fit_null(config: Configuration, table: ContingencyTable) -> FittedTable:
    """Null fitted values: closed form for two-way independence, IPF otherwise."""
    if is_two_way_independence(config) and table.shape == config.table_shape:
        return fitted_independence(table)
    return ipf_fit(table, config)


def degrees_of_freedom(config: Configuration) -> int:
    """nu - rank(A); equals (I-1)(J-1) for two-way independence."""
    return config.nu - int(np.linalg.matrix_rank(config.entries.astype(float)))


# --- statistics ----------------------------------------------------------

def _check_support(x: np.ndarray, m: np.ndarray):
    bad = (m <= 0) & (x > 0)
    if bad.any():
        raise ModelError("fitted value is zero in a cell with positive count")


def pearson_chi2(table: ContingencyTable, fitted: FittedTable) -> float:
    x = np.array(table.cells, dtype=float)
    m = fitted.values
    if x.shape != m.shape:
        raise ModelError("table and fitted shapes differ")
    _check_support(x, m)
    pos = m > 0
    return float(np.sum((x[pos] - m[pos]) ** 2 / m[pos]))


def likelihood_ratio(table: ContingencyTable, fitted: FittedTable) -> float:
    """G^2 = 2 sum x log(x / m), with 0 log 0 = 0."""
    x = np.array(table.cells, dtype=float)
    m = fitted.values
    if x.shape != m.shape:
        raise ModelError("table and fitted shapes differ")
    _check_support(x, m)
    pos = x > 0
    return float(2.0 * np.sum(x[pos] * np.log(x[pos] / m[pos])))


def statistic(kind, table: ContingencyTable, fitted: FittedTable) -> float:
    kind = StatisticKind.parse(kind)
    if kind is StatisticKind.PEARSON:
        return pearson_chi2(table, fitted)
    return likelihood_ratio(table, fitted)


def contribution_table(kind, fitted: FittedTable, max_count: int) -> np.ndarray:
    """Per-cell statistic terms ``c[j, x]`` for counts ``x = 0..max_count``.

    Summing ``c[j, x_j]`` over cells gives the statistic of table ``x``; the
    exact and Monte Carlo routes both evaluate statistics this way. Entries
    where the fit is zero but the count is positive are ``inf``.
    """
    kind = StatisticKind.parse(kind)
    m = fitted.values[:, None]
    x = np.arange(max_count + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is StatisticKind.PEARSON:
            c = np.where(m > 0, (x - m) ** 2 / m, np.where(x > 0, np.inf, 0.0))
        else:
            c = np.where(x > 0, 2.0 * x * np.log(x / m), 0.0)
            c = np.where((m <= 0) & (x > 0), np.inf, c)
    return c


# --- chi-square distribution ---------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def log_gamma(z: float) -> float:
    """log Gamma(z) for z > 0 (Lanczos, g=7, n=9)."""
    if z <= 0:
        raise ValueError("log_gamma needs z > 0")
    if z < 0.5:
        # reflection keeps the series in its accurate range
        return math.log(math.pi / math.sin(math.pi * z)) - log_gamma(1.0 - z)
    z -= 1.0
    s = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        s += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(s)


_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - log_gamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - log_gamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("gamma_q needs a > 0, x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(x: float, df: int) -> float:
    """P(V >= x) for V ~ chi-square with ``df`` degrees of freedom."""
    if x < 0:
        raise ValueError("chi-square quantile must be nonnegative")
    if df < 1:
        raise ValueError("degrees of freedom must be positive")
    return min(1.0, max(0.0, gamma_q(df / 2.0, x / 2.0)))


def chi2_quantile(p: float, df: int) -> float:
    """Upper-tail quantile: the x with chi2_sf(x, df) == p."""
    if not 0.0 < p < 1.0:
        raise ValueError("upper-tail mass must lie in (0, 1)")
    lo, hi = 0.0, max(1.0, float(df))
    while chi2_sf(hi, df) > p:
        lo, hi = hi, 2.0 * hi
    # bisection is slow but never leaves the bracket
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if chi2_sf(mid, df) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
