"""Which move sets connect a fiber?

A move set is a Markov basis only if it connects every fiber. In the 2x3
case one move is not enough, two moves connect the five-table fiber but miss
a two-table one, and all three basic moves connect both. For 3x3x3 tables
with all two-way margins fixed, the 27 degree-4 moves leave an 18-table
fiber in pieces and the 54 degree-6 moves join them.
"""

from markov_fiber import (
    MoveSet,
    basic_moves_n3f,
    degree6_moves_n3f,
    enumerate_fiber,
    fiber_graph,
    independence_config,
    no_three_factor_config,
)

z1, z2, z3 = (1, -1, 0, -1, 1, 0), (1, 0, -1, -1, 0, 1), (0, 1, -1, 0, -1, 1)
config = independence_config(2, 3)
for t in [(3, 2, 2, 2, 1), (1, 1, 0, 1, 1)]:
    fiber = enumerate_fiber(config, t)
    for name, zs in [("{z1}", [z1]), ("{z1,z2}", [z1, z2]), ("{z1,z2,z3}", [z1, z2, z3])]:
        g = fiber_graph(fiber, MoveSet(config, zs))
        print(f"t={t}  |F|={fiber.size}  moves {name:12} components {g.n_components}")

print()
three = no_three_factor_config(3, 3, 3)
t = (2, 1, 1, 1, 2, 1, 1, 1, 2) * 3
fiber = enumerate_fiber(three, t)
b4 = basic_moves_n3f(3, 3, 3)
b6 = degree6_moves_n3f(3, 3, 3)
print(f"3x3x3 fiber with diagonal-heavy margins: {fiber.size} tables")
print(f"  {len(b4)} degree-4 moves: {fiber_graph(fiber, b4).n_components} components")
print(f"  plus {len(b6)} degree-6 moves: {fiber_graph(fiber, b4.union(b6)).n_components} component")
