import itertools

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.orderings import ProductOrder, grevlex

from markov_fiber.groebner import ExponentOverflow, GroebnerTimeout, Ring, groebner_basis
from markov_fiber.model import no_three_factor_config
from markov_fiber.toric import toric_groebner_binomials


def block_grevlex_greater(a, b, nfirst):
    """Reference comparison: block order, graded reverse lex inside each block."""
    for lo, hi in ((0, nfirst), (nfirst, len(a))):
        x, y = a[lo:hi], b[lo:hi]
        if sum(x) != sum(y):
            return sum(x) > sum(y)
        for u, v in zip(reversed(x), reversed(y)):
            if u != v:
                return u < v
    return False


exps = st.lists(st.integers(0, 40), min_size=5, max_size=5)


class TestRingArithmetic:
    ring = Ring(5, 2, grading=[1, 1, 2, 3, 1])

    @given(exps, exps)
    def test_divides_and_lcm(self, a, b):
        pa, pb = self.ring.pack(a), self.ring.pack(b)
        assert self.ring.divides(pa, pb) == all(x <= y for x, y in zip(a, b))
        assert self.ring.unpack(self.ring.lcm(pa, pb)) == tuple(max(x, y) for x, y in zip(a, b))

    @given(exps)
    def test_degree_and_lowest_var(self, a):
        p = self.ring.pack(a)
        assert self.ring.degree(p) == sum(w * e for w, e in zip([1, 1, 2, 3, 1], a))
        nz = [i for i, e in enumerate(a) if e]
        if nz:
            assert self.ring.lowest_var(p) == nz[0]

    @given(exps, exps)
    def test_omega_realises_block_order(self, a, b):
        wa, wb = self.ring.omega(a), self.ring.omega(b)
        assert (wa > wb) == block_grevlex_greater(a, b, 2)
        assert (wa == wb) == (a == b)

    @given(exps, exps)
    def test_omega_is_additive(self, a, b):
        s = [x + y for x, y in zip(a, b)]
        assert self.ring.omega(s) == self.ring.omega(a) + self.ring.omega(b)

    def test_overflow(self):
        with pytest.raises(ExponentOverflow):
            self.ring.pack([2**15, 0, 0, 0, 0])
        with pytest.raises(ExponentOverflow):
            self.ring.pack([-1, 0, 0, 0, 0])


def sympy_basis(gens, nvars, nfirst):
    xs = sympy.symbols(f"x0:{nvars}")
    order = ProductOrder((grevlex, lambda m: m[:nfirst]), (grevlex, lambda m: m[nfirst:]))
    polys = [sympy.Mul(*[v**e for v, e in zip(xs, a)]) - sympy.Mul(*[v**e for v, e in zip(xs, b)])
             for a, b in gens]
    g = sympy.groebner(polys, *xs, order=order)
    out = set()
    for expr in g.exprs:
        terms = sympy.Poly(expr, *xs).terms(order=order)
        assert len(terms) == 2
        (lead, c1), (trail, c2) = terms
        assert c1 == -c2
        out.add((tuple(lead), tuple(trail)))
    return out


def our_basis(gens, nvars, nfirst):
    ring = Ring(nvars, nfirst)
    basis, _ = groebner_basis(ring, gens)
    return {(ring.unpack(b.plus), ring.unpack(b.minus)) for b in basis}


binomial = st.tuples(st.lists(st.integers(0, 2), min_size=4, max_size=4),
                     st.lists(st.integers(0, 2), min_size=4, max_size=4)).filter(lambda p: p[0] != p[1])


class TestBuchbergerAgainstSympy:
    def test_fixed_example(self):
        gens = [((1, 0, 1, 0), (0, 1, 0, 1)), ((2, 0, 0, 0), (0, 0, 3, 0)), ((0, 1, 1, 0), (0, 0, 0, 2))]
        assert our_basis(gens, 4, 2) == sympy_basis(gens, 4, 2)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(binomial, min_size=1, max_size=3), st.integers(0, 4))
    def test_random_binomial_ideals(self, gens, nfirst):
        assert our_basis(gens, 4, nfirst) == sympy_basis(gens, 4, nfirst)

    def test_twisted_cubic_elimination(self):
        # u_j - psi(u_j) for the moment curve; eliminating v gives the
        # three quadrics of the twisted cubic
        gens = [((0, 0, 1, 0, 0, 0), (3, 0, 0, 0, 0, 0)),
                ((0, 0, 0, 1, 0, 0), (2, 1, 0, 0, 0, 0)),
                ((0, 0, 0, 0, 1, 0), (1, 2, 0, 0, 0, 0)),
                ((0, 0, 0, 0, 0, 1), (0, 3, 0, 0, 0, 0))]
        assert our_basis(gens, 6, 2) == sympy_basis(gens, 6, 2)


class TestReducedBasis:
    def basis(self):
        ring = Ring(6, 2)
        gens = [((0, 0, 1, 0, 0, 0), (3, 0, 0, 0, 0, 0)), ((0, 0, 0, 1, 0, 0), (2, 1, 0, 0, 0, 0)),
                ((0, 0, 0, 0, 1, 0), (1, 2, 0, 0, 0, 0)), ((0, 0, 0, 0, 0, 1), (0, 3, 0, 0, 0, 0))]
        basis, stats = groebner_basis(ring, gens)
        return ring, basis, stats

    def test_leads_and_trails_irreducible(self):
        ring, basis, _ = self.basis()
        for f, g in itertools.permutations(basis, 2):
            assert not ring.divides(f.plus, g.plus)
        for f, g in itertools.product(basis, repeat=2):
            assert not ring.divides(f.plus, g.minus)

    def test_lead_is_larger_term(self):
        ring, basis, _ = self.basis()
        for b in basis:
            assert block_grevlex_greater(ring.unpack(b.plus), ring.unpack(b.minus), 2)
            assert b.delta == ring.omega(ring.unpack(b.minus)) - ring.omega(ring.unpack(b.plus)) < 0

    def test_stats(self):
        _, _, stats = self.basis()
        assert stats.pairs_reduced >= stats.zero_reductions
        assert stats.elapsed >= 0

    def test_identity_configuration_has_trivial_toric_ideal(self):
        from markov_fiber.model import custom_config

        pairs, stats = toric_groebner_binomials(custom_config([[1, 0], [0, 1]]))
        assert pairs == []


class TestDeadline:
    def test_timeout_reports_progress(self):
        with pytest.raises(GroebnerTimeout) as exc:
            toric_groebner_binomials(no_three_factor_config(3, 3, 3), deadline=0.2)
        assert exc.value.basis_size > 0
        assert exc.value.pairs_left > 0
