"""Three ways to get a p-value for the same 3x3 table.

Forty students are cross-classified by algebra and statistics grade. Under
independence the Pearson statistic is compared against (a) its chi-square
limit, (b) its exact conditional distribution given both margins, and (c) a
Markov chain that samples that conditional distribution.
"""

from markov_fiber import (
    ChainConfig,
    basic_moves_two_way,
    chi2_sf,
    degrees_of_freedom,
    exact_p_value,
    fit_null,
    independence_config,
    new_table,
    pearson_chi2,
    run_chain,
)

table = new_table((3, 3), (11, 5, 2, 4, 9, 1, 2, 3, 3))
config = independence_config(3, 3)
fitted = fit_null(config, table)

print("observed\n", table.as_array())
print("fitted under independence\n", fitted.as_array().round(2))

chi2 = pearson_chi2(table, fitted)
df = degrees_of_freedom(config)
print(f"\nPearson chi2 = {chi2:.4f} on {df} df")
print(f"(a) asymptotic p = {chi2_sf(chi2, df):.5f}")

exact = exact_p_value(config, table)
print(f"(b) exact p      = {exact.p_value:.8f}  ({exact.fiber_size} tables share these margins)")

chain = run_chain(config, table, basic_moves_two_way(3, 3), ChainConfig(seed=2024), fitted)
lo, hi = chain.ci95
print(f"(c) MCMC p_hat   = {chain.p_hat:.5f}  naive 95% CI [{lo:.5f}, {hi:.5f}]")
print(f"    acceptance rate {chain.acceptance_rate:.3f}")
print("\nAll three agree the table is borderline at the 5% level.")
