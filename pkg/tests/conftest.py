import numpy as np
import pytest

from markov_fiber.model import independence_config, new_table, no_three_factor_config

# Algebra (rows) by statistics (columns) scores, 40 students
TABLE1_CELLS = (11, 5, 2, 4, 9, 1, 2, 3, 3)
TABLE1_FITTED = np.array([[7.65, 7.65, 2.70], [5.95, 5.95, 2.10], [3.40, 3.40, 1.20]])
EXACT_P_TABLE1 = 0.07035480
EXACT_PERCENTILES_TABLE1 = (7.766, 9.353, 12.78, 17.99)
PERCENTILE_LEVELS = (0.90, 0.95, 0.99, 0.999)

# the five 2x3 tables with row sums (3, 2) and column sums (2, 2, 1),
# numbered x_1..x_5 in descending lexicographic order
EXAMPLE_2X3 = {
    1: (2, 1, 0, 0, 1, 1),
    2: (2, 0, 1, 0, 2, 0),
    3: (1, 2, 0, 1, 0, 1),
    4: (1, 1, 1, 1, 1, 0),
    5: (0, 2, 1, 2, 0, 0),
}
EXAMPLE_2X3_PROBS = (0.2, 0.1, 0.2, 0.4, 0.1)
EXAMPLE_2X3_CHI2 = (35 / 12, 5.0, 35 / 12, 5 / 6, 5.0)

Z1 = (1, -1, 0, -1, 1, 0)
Z2 = (1, 0, -1, -1, 0, 1)
Z3 = (0, 1, -1, 0, -1, 1)

# every two-way margin of the 3x3x3 table equals this 3x3 block
MARGIN_333 = (2, 1, 1, 1, 2, 1, 1, 1, 2)


@pytest.fixture
def table1():
    return new_table((3, 3), TABLE1_CELLS)


@pytest.fixture
def indep33():
    return independence_config(3, 3)


@pytest.fixture
def indep23():
    return independence_config(2, 3)


@pytest.fixture
def example_tables():
    return {k: new_table((2, 3), v) for k, v in EXAMPLE_2X3.items()}


@pytest.fixture
def n3f333():
    return no_three_factor_config(3, 3, 3)


def example_order(fiber):
    """Fiber row index of x_1..x_5 (fibers are stored ascending)."""
    return [fiber.index_of(new_table((2, 3), EXAMPLE_2X3[k])) for k in range(1, 6)]


@pytest.fixture(scope="session")
def groebner_233():
    """Toric Groebner run for no-three-factor 2x3x3, shared across modules."""
    import time

    from markov_fiber.toric import toric_groebner_binomials

    config = no_three_factor_config(2, 3, 3)
    start = time.perf_counter()
    pairs, stats = toric_groebner_binomials(config)
    return config, pairs, stats, time.perf_counter() - start


def binomial_label(pair, config, prefix):
    """``lead-trail`` with one-based cell labels, e.g. ``u12u21-u11u22``."""
    def mono(exps):
        out = []
        for j, e in enumerate(exps):
            lab = prefix + "".join(str(i + 1) for i in config.cell_label(j))
            out.extend([lab] * e)
        return "".join(out)
    return f"{mono(pair[0])}-{mono(pair[1])}"


INDEP_23_BINOMIALS = {"u13u22-u12u23", "u13u21-u11u23", "u12u21-u11u22"}
N3F_233_BINOMIALS = {
    "x122x133x223x232-x123x132x222x233", "x112x133x213x232-x113x132x212x233",
    "x121x133x223x231-x123x131x221x233", "x121x132x222x231-x122x131x221x232",
    "x111x133x213x231-x113x131x211x233", "x111x132x212x231-x112x131x211x232",
    "x112x123x213x222-x113x122x212x223", "x111x123x213x221-x113x121x211x223",
    "x111x122x212x221-x112x121x211x222",
    "x112x121x133x211x223x232-x111x123x132x212x221x233",
    "x111x122x133x213x221x232-x113x121x132x211x222x233",
    "x111x122x133x212x223x231-x112x123x131x211x222x233",
    "x113x121x132x212x223x231-x112x123x131x213x221x232",
    "x112x121x133x213x222x231-x113x122x131x212x221x233",
    "x111x123x132x213x222x231-x113x122x131x211x223x232",
}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
