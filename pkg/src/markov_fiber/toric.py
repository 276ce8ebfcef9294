"""Moves, Markov bases and fiber connectivity.

A move is an integer vector z with A z = 0. A set of moves is a Markov basis
when it connects every fiber; equivalently its binomials u^{z+} - u^{z-}
generate the toric ideal of A. :func:`toric_markov_basis` computes one as
the u-part of a reduced Groebner basis of ``<u_j - psi_A(u_j)>`` under an
order eliminating the statistic variables v.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exact import DEFAULT_LIMIT, Fiber, enumerate_fiber
from .groebner import FIELD, VALUE_MASK, Ring, groebner_basis
from .model import (
    Configuration,
    ContingencyTable,
    ModelError,
    as_stat,
    independence_config,
    no_three_factor_config,
    sufficient_stat,
)


def canonical_sign(z: Sequence[int]) -> tuple[int, ...]:
    """Flip z so its first nonzero entry is positive."""
    z = tuple(int(v) for v in z)
    for v in z:
        if v:
            return z if v > 0 else tuple(-x for x in z)
    return z


@dataclass(frozen=True)
class Move:
    z: tuple[int, ...]

    @property
    def z_plus(self) -> tuple[int, ...]:
        return tuple(max(v, 0) for v in self.z)

    @property
    def z_minus(self) -> tuple[int, ...]:
        return tuple(max(-v, 0) for v in self.z)

    @property
    def degree(self) -> int:
        return sum(self.z_plus)

    def as_array(self) -> np.ndarray:
        return np.array(self.z, dtype=np.int64)


def _sort_key(m: Move):
    return (m.degree, tuple(-v for v in m.z))


@dataclass(frozen=True, eq=False)
class MoveSet:
    """Moves for one configuration, unique up to sign."""

    config: Configuration
    moves: tuple[Move, ...] = field(default=())

    def __post_init__(self):
        seen = set()
        out = []
        a = self.config.entries
        for m in self.moves:
            z = m.z if isinstance(m, Move) else tuple(int(v) for v in m)
            if len(z) != self.config.nu:
                raise ModelError(f"move length {len(z)} != {self.config.nu} cells")
            if not any(z):
                raise ModelError("the zero vector is not a move")
            if (a @ np.array(z, dtype=np.int64)).any():
                raise ModelError(f"{z} is not in the kernel of the configuration")
            key = canonical_sign(z)
            if key not in seen:
                seen.add(key)
                out.append(Move(key))
        object.__setattr__(self, "moves", tuple(out))

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def sorted(self) -> "MoveSet":
        return MoveSet(self.config, tuple(sorted(self.moves, key=_sort_key)))

    def degree_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for m in self.moves:
            counts[m.degree] = counts.get(m.degree, 0) + 1
        return dict(sorted(counts.items()))

    def keys(self) -> set[tuple[int, ...]]:
        return {m.z for m in self.moves}

    def union(self, other: "MoveSet") -> "MoveSet":
        if other.config != self.config:
            raise ModelError("move sets belong to different configurations")
        return MoveSet(self.config, self.moves + other.moves)

    def as_matrix(self) -> np.ndarray:
        return np.array([m.z for m in self.moves], dtype=np.int64).reshape(len(self), self.config.nu)


def move_between(x: ContingencyTable, y: ContingencyTable, config: Configuration) -> Move:
    """The move x - y joining two tables of the same fiber (sign kept as given)."""
    if x.shape != y.shape:
        raise ModelError("tables have different shapes")
    if sufficient_stat(config, x) != sufficient_stat(config, y):
        raise ModelError("tables lie in different fibers")
    z = tuple(a - b for a, b in zip(x.cells, y.cells))
    if not any(z):
        raise ModelError("identical tables give no move")
    return Move(z)


# --- pattern providers ---------------------------------------------------

def basic_moves_two_way(I: int, J: int) -> MoveSet:
    """All degree-2 swaps +(i,j) +(i',j') -(i,j') -(i',j)."""
    config = independence_config(I, J)
    moves = []
    for i, i2 in itertools.combinations(range(I), 2):
        for j, j2 in itertools.combinations(range(J), 2):
            z = np.zeros((I, J), dtype=np.int64)
            z[i, j] = z[i2, j2] = 1
            z[i, j2] = z[i2, j] = -1
            moves.append(Move(tuple(z.ravel().tolist())))
    return MoveSet(config, tuple(moves))


def basic_moves_n3f(I: int, J: int, K: int) -> MoveSet:
    """Degree-4 basic moves of the no-three-factor model, one per 2x2x2 sub-box."""
    config = no_three_factor_config(I, J, K)
    moves = []
    for i, i2 in itertools.combinations(range(I), 2):
        for j, j2 in itertools.combinations(range(J), 2):
            for k, k2 in itertools.combinations(range(K), 2):
                z = np.zeros((I, J, K), dtype=np.int64)
                for a, b, c in itertools.product((0, 1), repeat=3):
                    idx = ((i, i2)[a], (j, j2)[b], (k, k2)[c])
                    z[idx] = 1 if (a + b + c) % 2 == 0 else -1
                moves.append(Move(tuple(z.ravel().tolist())))
    return MoveSet(config, tuple(moves))


# u111 u122 u133 u213 u221 u232 - u113 u121 u132 u211 u222 u233, on a 2x3x3 box
_DEG6_PLUS = ((0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 2), (1, 1, 0), (1, 2, 1))
_DEG6_MINUS = ((0, 0, 2), (0, 1, 0), (0, 2, 1), (1, 0, 0), (1, 1, 1), (1, 2, 2))
_DEG6_BOX = (2, 3, 3)


def degree6_moves_n3f(I: int, J: int, K: int) -> MoveSet:
    """Orbit of the degree-6 template under level relabelings and axis swaps.

    The template lives on a 2x3x3 box. Every placement sends the template's
    axes to the table's axes (any permutation whose box fits) and its levels
    injectively to table levels; results are deduplicated up to sign.
    """
    config = no_three_factor_config(I, J, K)
    dims = (I, J, K)
    seen: set[tuple[int, ...]] = set()
    moves = []
    for perm in itertools.permutations(range(3)):
        # template axis a goes to table axis perm[a]
        box = [0, 0, 0]
        for a in range(3):
            box[perm[a]] = _DEG6_BOX[a]
        if any(box[ax] > dims[ax] for ax in range(3)):
            continue
        level_maps = [itertools.permutations(range(dims[perm[a]]), _DEG6_BOX[a]) for a in range(3)]
        for maps in itertools.product(*(list(m) for m in level_maps)):
            z = np.zeros(dims, dtype=np.int64)
            for cells, sign in ((_DEG6_PLUS, 1), (_DEG6_MINUS, -1)):
                for cell in cells:
                    idx = [0, 0, 0]
                    for a in range(3):
                        idx[perm[a]] = maps[a][cell[a]]
                    z[tuple(idx)] += sign
            key = canonical_sign(z.ravel().tolist())
            if key not in seen:
                seen.add(key)
                moves.append(Move(key))
    return MoveSet(config, tuple(moves))


# --- Groebner route ------------------------------------------------------

def elimination_ring(config: Configuration) -> Ring:
    """Ring k[v_1..v_d, u_1..u_nu] with v eliminated first.

    Pair selection uses the grading deg v_i = 1, deg u_j = sum_i a_ij, which
    makes the generators u_j - psi(u_j) homogeneous.
    """
    d, nu = config.d, config.nu
    grading = [1] * d + [int(s) for s in config.entries.sum(axis=0)]
    return Ring(d + nu, d, grading)


def toric_groebner_binomials(config: Configuration, deadline: float | None = None):
    """Reduced Groebner basis of the toric ideal as (lead, trail) exponent pairs.

    Computes the basis of ``<u_j - psi_A(u_j)>`` in k[v, u] and keeps the
    elements free of v. Returns ``(pairs, stats)``; ``stats.full_basis_size``
    counts the whole elimination basis. Raises GroebnerTimeout past
    ``deadline`` seconds.
    """
    d, nu = config.d, config.nu
    ring = elimination_ring(config)
    gens = []
    for j in range(nu):
        psi = [int(v) for v in config.entries[:, j]] + [0] * nu
        u = [0] * (d + nu)
        u[d + j] = 1
        gens.append((u, psi))
    basis, stats = groebner_basis(ring, gens, deadline)
    vmask = sum(VALUE_MASK << (FIELD * i) for i in range(d))
    pairs = [
        (ring.unpack(b.plus)[d:], ring.unpack(b.minus)[d:])
        for b in basis
        if not (b.plus & vmask) and not (b.minus & vmask)
    ]
    stats.full_basis_size = len(basis)
    return pairs, stats


def toric_markov_basis(config: Configuration, deadline: float | None = None) -> MoveSet:
    """Markov basis of ``config``: the toric ideal's reduced Groebner basis as moves."""
    pairs, _ = toric_groebner_binomials(config, deadline)
    moves = [Move(tuple(p - m for p, m in zip(plus, minus))) for plus, minus in pairs]
    return MoveSet(config, tuple(moves))


def binomial_string(move: Move, config: Configuration, prefix: str = "u") -> str:
    """Render a move as ``u^{z+} - u^{z-}`` with one-based cell labels."""
    def mono(exps):
        parts = []
        for j, e in enumerate(exps):
            if e:
                lab = prefix + "".join(str(i + 1) for i in config.cell_label(j))
                parts.append(lab if e == 1 else f"{lab}^{e}")
        return "".join(parts) or "1"
    return f"{mono(move.z_plus)}-{mono(move.z_minus)}"


# --- fiber graphs --------------------------------------------------------

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


@dataclass(frozen=True)
class FiberGraph:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    components: tuple[tuple[int, ...], ...]

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def connected(self) -> bool:
        return self.n_components <= 1


def fiber_graph(fiber: Fiber, moves: MoveSet) -> FiberGraph:
    """Graph on fiber elements joining x, y when x - y is plus or minus a move."""
    if moves.config.nu != fiber.config.nu:
        raise ModelError("moves and fiber use different cell counts")
    index = {tuple(row): i for i, row in enumerate(fiber.cells.tolist())}
    uf = _UnionFind(fiber.size)
    edges = set()
    zs = [m.z for m in moves]
    for i, x in enumerate(fiber.cells.tolist()):
        for z in zs:
            y = tuple(a + b for a, b in zip(x, z))
            j = index.get(y)
            if j is not None:
                edges.add((min(i, j), max(i, j)))
                uf.union(i, j)
    comps: dict[int, list[int]] = {}
    for i in range(fiber.size):
        comps.setdefault(uf.find(i), []).append(i)
    return FiberGraph(fiber.size, tuple(sorted(edges)), tuple(tuple(c) for c in comps.values()))


@dataclass
class MarkovCheck:
    """Per-fiber connectivity verdicts.

    Passing shows the moves connect these fibers only; it does not certify a
    Markov basis for every statistic.
    """

    results: list[dict]

    @property
    def passed(self) -> bool:
        return all(r["connected"] for r in self.results)


def verify_markov_basis_on(ts: Iterable, config: Configuration, moves: MoveSet,
                           limit: int | None = DEFAULT_LIMIT) -> MarkovCheck:
    results = []
    for t in ts:
        t = as_stat(t)
        fiber = enumerate_fiber(config, t, limit)
        g = fiber_graph(fiber, moves)
        results.append({
            "t": list(t.t),
            "fiber_size": fiber.size,
            "components": g.n_components,
            "connected": g.connected,
        })
    return MarkovCheck(results)
