"""A five-table fiber worked by hand.

Tables with row sums (3, 2) and column sums (2, 2, 1) form a fiber of five
elements. This script lists them with their conditional probabilities and
chi-square values, then builds the proposal matrix R of the basic-move walk
and its Metropolis-Hastings correction Q as exact fractions.
"""

import numpy as np

from markov_fiber import (
    MoveSet,
    enumerate_fiber,
    exact_p_value,
    explicit_transition_matrix,
    fiber_statistics,
    independence_config,
    new_table,
)

config = independence_config(2, 3)
fiber = enumerate_fiber(config, (3, 2, 2, 2, 1))
stats = fiber_statistics(fiber, "pearson")

print("table            h(x)   chi2   exact p")
for row, p, s in zip(fiber.cells, fiber.probs, stats):
    x = new_table((2, 3), row.tolist())
    print(f"{row.tolist()}  {p:.2f}  {s:6.3f}  {exact_p_value(config, x).p_value:.2f}")

moves = MoveSet(config, [(1, -1, 0, -1, 1, 0), (1, 0, -1, -1, 0, 1), (0, 1, -1, 0, -1, 1)])
R, Q = explicit_transition_matrix(fiber, moves)


def show(name, m):
    print(f"\n{name}")
    for row in m:
        print("  " + "  ".join(f"{str(v):>5}" for v in row))


show("R (uniform over 3 moves x 2 signs, infeasible proposals stay)", R)
show("Q (Metropolis-Hastings)", Q)

pi = fiber.probs
Qf = np.array(Q, dtype=float)
print("\npi Q - pi =", np.abs(pi @ Qf - pi).max())
print("rows of Q^200 approach pi:", (np.linalg.matrix_power(Qf, 200)[0]).round(6))
