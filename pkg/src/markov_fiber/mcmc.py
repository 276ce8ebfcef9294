"""Metropolis-Hastings sampling on a fiber driven by a move set.

Each step picks a (move, sign) pair uniformly. A proposal with a negative
cell is rejected outright and the chain stays put, so the symmetric proposal
kernel R carries that mass on its diagonal. Feasible proposals are accepted
with probability ``min(1, h(y) / h(x))``; only log-weight differences are
needed, the normalizing constant never appears.

Random numbers come from numpy's PCG64 (``numpy.random.default_rng``),
seeded with a 64-bit unsigned integer and drawn in fixed-size blocks, so a
seed reproduces a chain bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exact import Fiber, at_least, log_factorials
from .model import Configuration, ContingencyTable, ModelError, sufficient_stat
from .report import TestReport
from .stats import FittedTable, StatisticKind, contribution_table, fit_null
from .toric import MoveSet

GENERATOR = "numpy.random.PCG64"
MAX_EXPLICIT_STATES = 1000
_BLOCK = 1 << 16
_SEED_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class ChainConfig:
    burn_in: int = 50_000
    samples: int = 100_000
    seed: int = 0
    statistic: StatisticKind = StatisticKind.PEARSON

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if not 0 <= self.seed <= _SEED_MAX:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "statistic", StatisticKind.parse(self.statistic))


@dataclass(frozen=True)
class PValueEstimate:
    p_hat: float
    se: float
    ci95: tuple[float, float]
    n: int
    hits: int


@dataclass(frozen=True, eq=False)
class ChainResult:
    statistic_samples: np.ndarray
    acceptance_rate: float
    p_hat: float
    se: float
    ci95: tuple[float, float]
    observed: float
    chain: ChainConfig
    generator: str = GENERATOR
    infeasible_rate: float = 0.0
    state_samples: np.ndarray | None = None
    final_state: tuple[int, ...] = ()

    def diagnostics(self) -> dict:
        return {
            "seed": self.chain.seed,
            "burn_in": self.chain.burn_in,
            "N": self.chain.samples,
            "generator": self.generator,
            "acceptance_rate": self.acceptance_rate,
            "infeasible_rate": self.infeasible_rate,
        }


def _hypergeometric_log_ratio(x: Sequence[int], y: Sequence[int]) -> float:
    """log h(y) - log h(x) = sum log x_i! - log y_i!."""
    return sum(math.lgamma(a + 1) - math.lgamma(b + 1) for a, b in zip(x, y) if a != b)


def mh_step(state: ContingencyTable, moves: MoveSet,
            pi_ratio: Callable[[Sequence[int], Sequence[int]], float] | None,
            rng: np.random.Generator) -> ContingencyTable:
    """One Metropolis-Hastings transition.

    ``pi_ratio(x, y)`` returns ``log(pi(y) / pi(x))``; None means the
    hypergeometric law.
    """
    if len(moves) == 0:
        raise ModelError("empty move set")
    if pi_ratio is None:
        pi_ratio = _hypergeometric_log_ratio
    k = int(rng.integers(0, 2 * len(moves)))
    sign = 1 if k % 2 == 0 else -1
    z = moves.moves[k // 2].z
    y = tuple(a + sign * b for a, b in zip(state.cells, z))
    if min(y) < 0:
        return state
    log_r = pi_ratio(state.cells, y)
    if log_r >= 0 or math.log(rng.random()) < log_r:
        return ContingencyTable(state.shape, y)
    return state


def estimate_p_value(samples, observed: float, rtol: float = 1e-12) -> PValueEstimate:
    """Fraction of samples at least ``observed`` with a binomial standard error."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("no samples")
    hits = int(np.count_nonzero(at_least(s, observed, rtol)))
    return _estimate(hits, s.size)


def _estimate(hits: int, n: int) -> PValueEstimate:
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    ci = (max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se))
    return PValueEstimate(p, se, ci, n, hits)


def mc_percentiles(samples, levels: Sequence[float]) -> list[float]:
    """Nearest-rank empirical quantiles: the ceil(q N)-th smallest sample."""
    s = np.sort(np.asarray(samples, dtype=float))
    if s.size == 0:
        raise ValueError("no samples")
    out = []
    for q in levels:
        if not 0.0 < q <= 1.0:
            raise ValueError("levels must lie in (0, 1]")
        k = max(1, math.ceil(q * s.size - 1e-9))
        out.append(float(s[k - 1]))
    return out


def _cell_sum(rows: list[list[float]], x: Sequence[int]) -> float:
    return sum(row[v] for row, v in zip(rows, x))


def run_chain(config: Configuration, x0: ContingencyTable, moves: MoveSet, chain: ChainConfig,
              fitted: FittedTable | None = None, *, record_states: bool = False,
              check_fiber: bool = False) -> ChainResult:
    """Run ``burn_in`` discarded steps, then record the statistic after each of ``samples`` steps.

    With ``check_fiber`` every visited state is checked against A x0 (slow;
    meant for debugging).
    """
    if len(moves) == 0:
        raise ModelError("empty move set")
    if moves.config.nu != config.nu or x0.nu != config.nu:
        raise ModelError("table, configuration and moves disagree on the cell count")
    if fitted is None:
        fitted = fit_null(config, x0)
    n = x0.n
    lf = log_factorials(max(n, 1)).tolist()
    contrib = contribution_table(chain.statistic, fitted, max(n, 1)).tolist()
    t0 = sufficient_stat(config, x0) if check_fiber else None

    proposals = []
    for m in moves:
        support = [(j, v) for j, v in enumerate(m.z) if v]
        proposals.append(support)
        proposals.append([(j, -v) for j, v in support])
    n_prop = len(proposals)

    x = list(x0.cells)
    observed = _cell_sum(contrib, x)
    current = observed
    total = chain.burn_in + chain.samples
    out = np.empty(chain.samples)
    states = np.empty((chain.samples, config.nu), dtype=np.int64) if record_states else None
    rng = np.random.default_rng(chain.seed)
    accepted = infeasible = 0
    step = 0
    while step < total:
        block = min(_BLOCK, total - step)
        picks = rng.integers(0, n_prop, size=block).tolist()
        with np.errstate(divide="ignore"):
            log_u = np.log(rng.random(block)).tolist()
        for k, lu in zip(picks, log_u):
            prop = proposals[k]
            for j, dv in prop:
                if x[j] + dv < 0:
                    infeasible += 1
                    break
            else:
                log_r = 0.0
                for j, dv in prop:
                    log_r += lf[x[j]] - lf[x[j] + dv]
                if log_r >= 0.0 or lu < log_r:
                    for j, dv in prop:
                        x[j] += dv
                    current = _cell_sum(contrib, x)
                    accepted += 1
                    if check_fiber and sufficient_stat(config, ContingencyTable(x0.shape, tuple(x))) != t0:
                        raise AssertionError("chain left the fiber")
            if step >= chain.burn_in:
                i = step - chain.burn_in
                out[i] = current
                if states is not None:
                    states[i] = x
            step += 1

    est = estimate_p_value(out, observed)
    return ChainResult(
        statistic_samples=out,
        acceptance_rate=accepted / total,
        p_hat=est.p_hat,
        se=est.se,
        ci95=est.ci95,
        observed=observed,
        chain=chain,
        infeasible_rate=infeasible / total,
        state_samples=states,
        final_state=tuple(x),
    )


@dataclass
class PooledEstimate:
    """Combination of independent chains; p_hat is the pooled hit fraction."""

    estimate: PValueEstimate
    seeds: list[int] = field(default_factory=list)
    per_chain: list[float] = field(default_factory=list)


def pool_chains(results: Sequence[ChainResult]) -> PooledEstimate:
    if not results:
        raise ValueError("nothing to pool")
    obs = {r.observed for r in results}
    if len(obs) != 1:
        raise ValueError("chains were run for different observed statistics")
    hits = sum(int(round(r.p_hat * r.chain.samples)) for r in results)
    n = sum(r.chain.samples for r in results)
    return PooledEstimate(_estimate(hits, n), [r.chain.seed for r in results],
                          [r.p_hat for r in results])


def mcmc_p_value(config: Configuration, observed: ContingencyTable, moves: MoveSet,
                 chain: ChainConfig, trace_path=None) -> TestReport:
    fitted = fit_null(config, observed)
    res = run_chain(config, observed, moves, chain, fitted)
    if trace_path is not None:
        from .io import write_trace

        write_trace(res.statistic_samples, trace_path)
    return TestReport(
        strategy="mcmc",
        statistic_kind=chain.statistic.value,
        statistic=res.observed,
        p_value=res.p_hat,
        se=res.se,
        ci95=res.ci95,
        diagnostics=res.diagnostics(),
    )


# --- explicit kernels for small fibers -------------------------------------

def _weight_ratio(x: Sequence[int], y: Sequence[int]) -> Fraction:
    """h(y) / h(x) = prod x_i! / y_i!, exactly."""
    num = den = 1
    for a, b in zip(x, y):
        num *= math.factorial(a)
        den *= math.factorial(b)
    return Fraction(num, den)


def explicit_transition_matrix(fiber: Fiber, moves: MoveSet, exact: bool = True):
    """Proposal matrix R and Metropolis-Hastings matrix Q on the fiber elements.

    Rows and columns follow the fiber's element order. R puts mass
    1/(2|moves|) on each (move, sign) pair and keeps infeasible proposals on
    the diagonal. With ``exact`` the entries are Fractions in object arrays,
    otherwise floats.
    """
    s = fiber.size
    if s > MAX_EXPLICIT_STATES:
        raise ModelError(f"fiber has {s} elements; explicit matrices are limited to {MAX_EXPLICIT_STATES}")
    if len(moves) == 0:
        raise ModelError("empty move set")
    if moves.config.nu != fiber.config.nu:
        raise ModelError("moves and fiber use different cell counts")
    rows = [tuple(r) for r in fiber.cells.tolist()]
    index = {r: i for i, r in enumerate(rows)}
    step = Fraction(1, 2 * len(moves))
    zero = Fraction(0)
    R = [[zero] * s for _ in range(s)]
    for i, x in enumerate(rows):
        for m in moves:
            for sign in (1, -1):
                y = tuple(a + sign * b for a, b in zip(x, m.z))
                # a feasible y always has the same t, so it is in the fiber
                j = index.get(y, i) if min(y) >= 0 else i
                R[i][j] += step
    Q = [[zero] * s for _ in range(s)]
    for i, x in enumerate(rows):
        off = zero
        for j, y in enumerate(rows):
            if j != i and R[i][j]:
                Q[i][j] = R[i][j] * min(Fraction(1), _weight_ratio(x, y))
                off += Q[i][j]
        Q[i][i] = 1 - off
    if exact:
        return np.array(R, dtype=object), np.array(Q, dtype=object)
    return np.array(R, dtype=float), np.array(Q, dtype=float)
