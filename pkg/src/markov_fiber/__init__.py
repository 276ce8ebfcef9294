"""Conditional goodness-of-fit testing for log-linear models on contingency tables."""

from .exact import (
    DEFAULT_LIMIT,
    Fiber,
    FiberLimitError,
    enumerate_fiber,
    exact_p_value,
    exact_percentiles,
    fiber_probabilities,
    fiber_statistics,
    log_weight,
)
from .groebner import GroebnerTimeout
from .mcmc import (
    ChainConfig,
    ChainResult,
    estimate_p_value,
    explicit_transition_matrix,
    mc_percentiles,
    mh_step,
    pool_chains,
    run_chain,
)
from .model import (
    Configuration,
    ContingencyTable,
    ModelError,
    SufficientStat,
    custom_config,
    independence_config,
    marginal_config,
    new_table,
    no_three_factor_config,
    sufficient_stat,
)
from .report import TestReport
from .stats import (
    StatisticKind,
    chi2_quantile,
    chi2_sf,
    degrees_of_freedom,
    fit_null,
    ipf_fit,
    likelihood_ratio,
    pearson_chi2,
)
from .toric import (
    Move,
    MoveSet,
    basic_moves_n3f,
    basic_moves_two_way,
    degree6_moves_n3f,
    fiber_graph,
    toric_markov_basis,
    verify_markov_basis_on,
)

__version__ = "0.1.0"
