"""How far off is one MCMC run?

Each run reports p_hat with the textbook error sqrt(p(1-p)/N), which assumes
independent draws. Successive states of a Metropolis chain are correlated, so
runs scatter more than that. Twenty seeds show the spread; the exact
p-value is the reference.
"""

import numpy as np

from markov_fiber import (
    ChainConfig,
    basic_moves_two_way,
    enumerate_fiber,
    exact_p_value,
    exact_percentiles,
    fit_null,
    independence_config,
    mc_percentiles,
    new_table,
    pool_chains,
    run_chain,
    sufficient_stat,
)

table = new_table((3, 3), (11, 5, 2, 4, 9, 1, 2, 3, 3))
config = independence_config(3, 3)
fitted = fit_null(config, table)
exact = exact_p_value(config, table).p_value
levels = (0.90, 0.95, 0.99, 0.999)

runs = [run_chain(config, table, basic_moves_two_way(3, 3), ChainConfig(seed=s), fitted) for s in range(1, 21)]
p = np.array([r.p_hat for r in runs])
print(f"exact p = {exact:.5f}")
print(f"20 runs: mean p_hat {p.mean():.5f}, sd across seeds {p.std(ddof=1):.5f}, "
      f"typical reported se {np.mean([r.se for r in runs]):.5f}")
pooled = pool_chains(runs)
print(f"pooled over seeds {pooled.seeds[0]}..{pooled.seeds[-1]}: {pooled.estimate.p_hat:.5f}")

fiber = enumerate_fiber(config, sufficient_stat(config, table))
print("\nlevel   exact   MC (min..max over seeds)")
mc = np.array([mc_percentiles(r.statistic_samples, levels) for r in runs])
for q, e, col in zip(levels, exact_percentiles(fiber, "pearson", levels, fitted), mc.T):
    print(f"{q:5}  {e:7.3f}   {col.min():.3f}..{col.max():.3f}")
