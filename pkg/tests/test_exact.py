import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    EXACT_P_TABLE1,
    EXACT_PERCENTILES_TABLE1,
    EXAMPLE_2X3_CHI2,
    EXAMPLE_2X3_PROBS,
    PERCENTILE_LEVELS,
    example_order,
)
from markov_fiber.exact import (
    FiberLimitError,
    at_least,
    enumerate_fiber,
    exact_p_value,
    exact_percentiles,
    fiber_probabilities,
    fiber_statistics,
    log_factorials,
    log_weight,
    read_fiber_jsonl,
)
from markov_fiber.model import (
    ModelError,
    custom_config,
    independence_config,
    new_table,
    no_three_factor_config,
    sufficient_stat,
)
from markov_fiber.stats import fitted_independence


def brute_force_fiber(config, t):
    """Scan the whole box 0 <= x_j <= min_i t_i / a_ij, lexicographically."""
    a = config.entries
    caps = [min(t[i] // a[i, j] for i in range(config.d) if a[i, j]) for j in range(config.nu)]
    return [x for x in itertools.product(*(range(c + 1) for c in caps))
            if tuple(a @ np.array(x)) == tuple(t)]


def exact_weights(rows):
    """Hypergeometric probabilities as Fractions from integer factorials."""
    w = [Fraction(1, math.prod(math.factorial(v) for v in x)) for x in rows]
    total = sum(w)
    return [v / total for v in w]


small_2x3 = st.lists(st.integers(0, 2), min_size=6, max_size=6).filter(lambda c: sum(c) > 0)


class TestEnumeration:
    def test_table1_fiber_size(self, table1, indep33):
        f = enumerate_fiber(indep33, sufficient_stat(indep33, table1))
        assert f.size == 2366

    def test_example_fiber(self, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        assert f.size == 5
        assert [tuple(r) for r in f.cells] == sorted(tuple(r) for r in f.cells)

    def test_two_element_fiber(self, indep23):
        f = enumerate_fiber(indep23, (1, 1, 0, 1, 1))
        assert {tuple(r) for r in f.cells} == {(0, 1, 0, 0, 0, 1), (0, 0, 1, 0, 1, 0)}

    def test_unreachable_statistic_gives_empty_fiber(self, indep23):
        # row total 3 versus column total 2
        f = enumerate_fiber(indep23, (2, 1, 1, 1, 0))
        assert f.size == 0
        with pytest.raises(ModelError):
            fiber_probabilities(f)

    def test_bad_statistic(self, indep23):
        with pytest.raises(ModelError):
            enumerate_fiber(indep23, (1, 1, 1))
        with pytest.raises(ModelError):
            enumerate_fiber(indep23, (1, -1, 0, 0, 0))

    def test_limit(self, table1, indep33):
        with pytest.raises(FiberLimitError) as exc:
            enumerate_fiber(indep33, sufficient_stat(indep33, table1), limit=100)
        assert exc.value.limit == 100
        assert "mcmc" in str(exc.value)

    def test_three_way_fiber(self, n3f333):
        from conftest import MARGIN_333

        f = enumerate_fiber(n3f333, MARGIN_333 * 3)
        assert f.size == 18

    @settings(max_examples=40, deadline=None)
    @given(small_2x3)
    def test_matches_brute_force_independence(self, cells):
        c = independence_config(2, 3)
        t = sufficient_stat(c, new_table((2, 3), cells)).t
        f = enumerate_fiber(c, t)
        assert [tuple(r) for r in f.cells] == brute_force_fiber(c, t)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 2), min_size=8, max_size=8).filter(lambda c: sum(c) > 0))
    def test_matches_brute_force_n3f(self, cells):
        c = no_three_factor_config(2, 2, 2)
        t = sufficient_stat(c, new_table((2, 2, 2), cells)).t
        assert [tuple(r) for r in enumerate_fiber(c, t).cells] == brute_force_fiber(c, t)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.lists(st.integers(0, 2), min_size=4, max_size=4), min_size=1, max_size=3),
           st.lists(st.integers(0, 3), min_size=4, max_size=4))
    def test_matches_brute_force_general_matrix(self, rows, x):
        # entries up to 2 exercise the divisibility checks in the search
        rows = [r for r in rows] + [[1, 1, 1, 1]]
        c = custom_config(rows)
        t = sufficient_stat(c, new_table((4,), x)).t
        assert [tuple(r) for r in enumerate_fiber(c, t).cells] == brute_force_fiber(c, t)


class TestFiberMembership:
    def test_every_element_has_statistic_t(self, table1, indep33):
        t = sufficient_stat(indep33, table1)
        f = enumerate_fiber(indep33, t)
        np.testing.assert_array_equal(f.cells @ indep33.entries.T, np.tile(t.as_array(), (f.size, 1)))
        assert (f.cells >= 0).all()
        assert len({tuple(r) for r in f.cells}) == f.size

    def test_index_of(self, example_tables, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        for x in example_tables.values():
            assert tuple(f.cells[f.index_of(x)]) == x.cells
        with pytest.raises(KeyError):
            f.index_of(new_table((2, 3), (3, 0, 0, 0, 2, 0)))


class TestHypergeometricWeights:
    def test_example_probabilities(self, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        np.testing.assert_allclose(f.probs[example_order(f)], EXAMPLE_2X3_PROBS, atol=1e-9)

    def test_normalization_table1(self, table1, indep33):
        f = enumerate_fiber(indep33, sufficient_stat(indep33, table1))
        assert abs(f.probs.sum() - 1.0) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=6, max_size=6).filter(lambda c: 0 < sum(c) <= 12))
    def test_rational_oracle(self, cells):
        c = independence_config(2, 3)
        t = sufficient_stat(c, new_table((2, 3), cells))
        f = enumerate_fiber(c, t)
        expected = exact_weights([tuple(r) for r in f.cells])
        np.testing.assert_allclose(f.probs, [float(v) for v in expected], rtol=1e-12, atol=0)
        assert abs(f.probs.sum() - 1.0) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 2), min_size=12, max_size=12).filter(lambda c: 0 < sum(c) <= 12))
    def test_rational_oracle_three_way(self, cells):
        c = no_three_factor_config(2, 2, 3)
        f = enumerate_fiber(c, sufficient_stat(c, new_table((2, 2, 3), cells)))
        expected = exact_weights([tuple(r) for r in f.cells])
        np.testing.assert_allclose(f.probs, [float(v) for v in expected], rtol=1e-12, atol=0)

    def test_log_weight(self):
        x = new_table((2, 2), (3, 0, 1, 5))
        assert log_weight(x) == pytest.approx(-math.log(6 * 120), rel=1e-14)
        np.testing.assert_allclose(log_factorials(5), [math.lgamma(k + 1) for k in range(6)], rtol=1e-14)


class TestExactPValue:
    def test_table1(self, table1, indep33):
        r = exact_p_value(indep33, table1)
        assert r.p_value == pytest.approx(EXACT_P_TABLE1, abs=1e-6)
        assert r.fiber_size == 2366
        assert r.strategy == "exact"

    def test_table1_lrt(self, table1, indep33):
        assert exact_p_value(indep33, table1, "lrt").p_value == pytest.approx(0.135436, abs=1e-5)

    def test_example_statistics(self, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        m = fitted_independence(new_table((2, 3), f.cells[0].tolist()))
        s = fiber_statistics(f, "pearson", m)
        np.testing.assert_allclose(s[example_order(f)], EXAMPLE_2X3_CHI2, atol=5e-3)

    @pytest.mark.parametrize("k,expected", [(4, 1.0), (1, 0.6), (3, 0.6), (2, 0.2), (5, 0.2)])
    def test_example_p_values(self, example_tables, indep23, k, expected):
        assert exact_p_value(indep23, example_tables[k]).p_value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("stat", ["pearson", "lrt"])
    def test_singleton_fiber(self, stat):
        c = independence_config(2, 2)
        r = exact_p_value(c, new_table((2, 2), (4, 0, 0, 0)), stat)
        assert r.fiber_size == 1
        assert r.p_value == pytest.approx(1.0)

    def test_brute_force_oracle(self, indep23):
        x = new_table((2, 3), (3, 1, 0, 0, 2, 2))
        rows = brute_force_fiber(indep23, sufficient_stat(indep23, x).t)
        probs = exact_weights(rows)
        m = fitted_independence(x)
        stat = lambda r: float(((np.array(r) - m.values) ** 2 / m.values).sum())
        obs = stat(x.cells)
        expected = sum(p for r, p in zip(rows, probs) if stat(r) >= obs - 1e-9)
        assert exact_p_value(indep23, x).p_value == pytest.approx(float(expected), abs=1e-12)

    @pytest.mark.parametrize("stat", ["pearson", "lrt"])
    def test_p_value_monotone_in_statistic(self, indep23, stat):
        x = new_table((2, 3), (3, 1, 0, 0, 2, 2))
        f = enumerate_fiber(indep23, sufficient_stat(indep23, x))
        m = fitted_independence(x)
        s = fiber_statistics(f, stat, m)
        p = np.array([exact_p_value(indep23, e, stat).p_value for e in f.elements])
        order = np.argsort(s)
        assert (np.diff(p[order]) <= 1e-12).all()

    def test_ties_are_inclusive(self):
        assert at_least([1.0, 1.0 - 1e-14, 0.9], 1.0).tolist() == [True, True, False]


class TestPercentiles:
    def test_table1(self, table1, indep33):
        f = enumerate_fiber(indep33, sufficient_stat(indep33, table1))
        got = exact_percentiles(f, "pearson", PERCENTILE_LEVELS, fitted_independence(table1))
        np.testing.assert_allclose(got, EXACT_PERCENTILES_TABLE1, atol=5e-3)

    def test_levels_checked(self, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        with pytest.raises(ValueError):
            exact_percentiles(f, "pearson", [1.0])

    def test_discrete_quantile_definition(self, indep23):
        # chi2 masses: 5/6 -> 0.4, 35/12 -> 0.4, 5 -> 0.2
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        got = exact_percentiles(f, "pearson", [0.3, 0.4, 0.5, 0.8, 0.81])
        np.testing.assert_allclose(got, [5 / 6, 5 / 6, 35 / 12, 35 / 12, 5.0])


class TestFiberExport:
    def test_jsonl_roundtrip(self, tmp_path, indep23):
        f = enumerate_fiber(indep23, (3, 2, 2, 2, 1))
        path = tmp_path / "fiber.jsonl"
        f.to_jsonl(path)
        rows = read_fiber_jsonl(path)
        assert [r["cells"] for r in rows] == f.cells.tolist()
        assert [r["log_weight"] for r in rows] == f.log_weights.tolist()
        json.loads(path.read_text().splitlines()[0])
