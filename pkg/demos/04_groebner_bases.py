"""Markov bases from a Groebner basis computation.

The toric ideal of A is the kernel of u_j -> v^{a_j}. Adding v-variables and
eliminating them under a block order gives its reduced Groebner basis, whose
binomials u^{z+} - u^{z-} are a Markov basis. For 2x3 independence that is
the three basic moves; for the 2x3x3 no-three-factor model it is 9 degree-4
and 6 degree-6 moves.
"""

import time

from markov_fiber import independence_config, no_three_factor_config
from markov_fiber.toric import Move, basic_moves_n3f, binomial_string, degree6_moves_n3f, toric_groebner_binomials

for config, prefix in [(independence_config(2, 3), "u"), (no_three_factor_config(2, 3, 3), "x")]:
    start = time.perf_counter()
    pairs, stats = toric_groebner_binomials(config)
    took = time.perf_counter() - start
    print(f"{config.name} {config.table_shape}: {stats.full_basis_size} generators in the "
          f"elimination basis, {len(pairs)} free of v ({took:.1f}s, {stats.pairs_reduced} pairs reduced)")
    for lead, trail in pairs:
        print("   ", binomial_string(Move(tuple(a - b for a, b in zip(lead, trail))), config, prefix))

patterns = basic_moves_n3f(2, 3, 3).union(degree6_moves_n3f(2, 3, 3))
print(f"\nclosed-form patterns for 2x3x3: {patterns.degree_counts()}")
