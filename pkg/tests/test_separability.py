import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import (EXAMPLE1, EXAMPLE1_FACTORS, EXAMPLE1_VARS, MIXED22, SEP22,
                     SUITE_CARDS, XOR, XOR_VARS, brute_compose, example1_cpt,
                     factorization, normal_equations_projection,
                     random_factorization, xor_cpt)
from sepbn import separability as sep
from sepbn.cpt import Cpt
from sepbn.errors import NotSeparableError, RepairInfeasibleError
from sepbn.linalg import VariableSet, build_basis_matrix, build_event_matrix

seeds = st.integers(0, 2**32 - 1)
suite_cards = st.sampled_from(SUITE_CARDS)


# projection

def test_project_example1_is_fixed():
    np.testing.assert_allclose(sep.project(example1_cpt()), EXAMPLE1, atol=1e-12)


def test_project_xor_is_uniform():
    a = build_basis_matrix(XOR_VARS).entries
    np.testing.assert_allclose(normal_equations_projection(a, XOR), 0.5, atol=1e-12)
    np.testing.assert_allclose(sep.project(xor_cpt()), 0.5, atol=1e-12)


@given(seeds, suite_cards)
def test_project_fixes_range(seed, cards):
    rng = np.random.default_rng(seed)
    vars = VariableSet(cards, 3)
    a = build_basis_matrix(vars).entries
    rows = a @ rng.standard_normal((a.shape[1], 3))
    c = Cpt(vars, rows)
    np.testing.assert_allclose(sep.project(c), rows, atol=1e-10)


@given(seeds, suite_cards)
def test_projection_properties(seed, cards):
    rng = np.random.default_rng(seed)
    vars = VariableSet(cards, 3)
    c = Cpt(vars, rng.dirichlet(np.ones(3), size=vars.joint_size))
    p = sep.project(c)
    a = build_basis_matrix(vars).entries
    np.testing.assert_allclose(p, normal_equations_projection(a, c.rows), atol=1e-10)
    np.testing.assert_allclose(sep.project(Cpt(vars, p)), p, atol=1e-10)
    np.testing.assert_allclose(a.T @ (c.rows - p), 0, atol=1e-10)
    np.testing.assert_allclose(p.sum(axis=1), 1, atol=1e-10)


# separability test

def test_example1_is_separable():
    v = sep.test_separable(example1_cpt())
    assert v.separable and v.residual <= 1e-10


def test_xor_is_not_separable():
    v = sep.test_separable(xor_cpt())
    assert not v.separable
    assert v.residual == pytest.approx(np.sqrt(2), abs=1e-10)


def test_verdict_threshold_is_relative():
    c = xor_cpt()
    assert sep.test_separable(c, tol=1.5).separable
    assert not sep.test_separable(c, tol=0.5).separable


@given(seeds, suite_cards)
def test_composed_tables_are_separable(seed, cards):
    f = random_factorization(np.random.default_rng(seed), cards, 3)
    assert sep.test_separable(sep.compose(f)).separable


# compose

@pytest.mark.parametrize("which", [0, 1])
def test_compose_example1_factorizations(which):
    gammas, cx, cy = EXAMPLE1_FACTORS[which]
    c = sep.compose(factorization(EXAMPLE1_VARS, gammas, cx, cy))
    np.testing.assert_allclose(c.rows, EXAMPLE1, atol=1e-12)


def test_compose_degenerate_weight_ignores_second_parent():
    cx = [[.3, .7], [.2, .8]]
    c = sep.compose(factorization(EXAMPLE1_VARS, (1, 0), cx, [[1, 0], [.4, .6], [.1, .9]]))
    for i in range(2):
        for j in range(3):
            np.testing.assert_array_equal(c.rows[3 * i + j], cx[i])


@given(seeds, suite_cards)
def test_compose_matches_rowwise_mixture(seed, cards):
    f = random_factorization(np.random.default_rng(seed), cards, 2)
    np.testing.assert_allclose(sep.compose(f).rows,
                               brute_compose(f.vars, f.gammas, f.tables), atol=1e-14)


def test_factorization_shape_errors():
    with pytest.raises(ValueError, match="table 1"):
        factorization(EXAMPLE1_VARS, (.5, .5), [[.3, .7], [.2, .8]], [[1, 0], [.4, .6]])
    with pytest.raises(ValueError, match="weights"):
        factorization(EXAMPLE1_VARS, (1,), [[.3, .7], [.2, .8]], [[1, 0]] * 3)


def test_factorization_validity_report():
    f = factorization(EXAMPLE1_VARS, (.6, .5), [[.3, .7], [.2, .8]], [[1, 0], [.4, .6], [.1, .8]])
    problems = f.problems()
    assert any("sum to" in p for p in problems)
    assert any("table 1" in p for p in problems)


# coefficients

def test_solve_coefficients_example1():
    c = example1_cpt()
    f = sep.solve_coefficients(c)
    assert f.shape == (5, 2)
    np.testing.assert_allclose(build_event_matrix(c.vars).entries @ f, EXAMPLE1, atol=1e-10)


def test_solve_coefficients_constant_rows():
    vars = VariableSet((2, 3), 3)
    c = Cpt(vars, np.tile([.2, .3, .5], (6, 1)))
    f = sep.solve_coefficients(c)
    np.testing.assert_allclose(build_event_matrix(vars).entries @ f, c.rows, atol=1e-10)


def test_solve_coefficients_single_variable():
    vars = VariableSet((3,), 2)
    rows = np.array([[.1, .9], [.5, .5], [1, 0]])
    np.testing.assert_allclose(sep.solve_coefficients(Cpt(vars, rows)), rows, atol=1e-14)


def test_solve_coefficients_rejects_xor():
    with pytest.raises(NotSeparableError) as err:
        sep.solve_coefficients(xor_cpt())
    assert err.value.residual == pytest.approx(np.sqrt(2))


# repair

def test_repair_leaves_nonnegative_untouched():
    f = np.array([[.1, .2], [0, .3], [.4, 0], [.5, .5], [.2, .2]])
    np.testing.assert_array_equal(sep.repair_negative_columns(f, VariableSet((2, 3), 2)), f)


def test_repair_two_variable_example():
    vars = VariableSet((2, 3), 1)
    f = np.array([[-.1], [0], [.3], [.4], [.5]])
    g = sep.repair_negative_columns(f, vars)
    np.testing.assert_allclose(g[:, 0], [0, .1, .2, .3, .4], atol=1e-15)
    b = build_event_matrix(vars).entries
    np.testing.assert_allclose(b @ g, b @ f, atol=1e-15)


def test_repair_three_variable_single_donor():
    vars = VariableSet((2, 2, 2), 1)
    # block minima -.1, -.2, .5; the third block absorbs .3
    f = np.array([[-.1], [.2], [-.2], [.1], [.5], [.7]])
    g = sep.repair_negative_columns(f, vars)
    np.testing.assert_allclose(g[:, 0], [0, .3, 0, .3, .2, .4], atol=1e-15)
    b = build_event_matrix(vars).entries
    np.testing.assert_allclose(b @ g, b @ f, atol=1e-15)


def test_repair_greedy_prefers_largest_capacity():
    vars = VariableSet((2, 2, 2), 1)
    # minima -.3, .2, .4: block 3 gives .3 alone
    f = np.array([[-.3], [.5], [.2], [.6], [.4], [.9]])
    g = sep.repair_negative_columns(f, vars)
    np.testing.assert_allclose(g[:, 0], [0, .8, .2, .6, .1, .6], atol=1e-15)


def test_repair_infeasible():
    vars = VariableSet((2, 3), 1)
    f = np.array([[-.5], [0], [.3], [.4], [.5]])
    with pytest.raises(RepairInfeasibleError):
        sep.repair_negative_columns(f, vars)


@given(seeds, suite_cards)
def test_repair_soundness(seed, cards):
    rng = np.random.default_rng(seed)
    f = random_factorization(rng, cards, 3, sparse=True)
    vars = f.vars
    coef = sep.solve_coefficients(sep.compose(f))
    shift = rng.normal(scale=0.5, size=vars.n)
    shift -= shift.mean()
    for s, blk in zip(shift, vars.blocks()):
        coef[blk] += s
    repaired = sep.repair_negative_columns(coef, vars)
    b = build_event_matrix(vars).entries
    assert repaired.min() >= -1e-10
    np.testing.assert_allclose(b @ repaired, b @ coef, atol=1e-10)


# factorize

def _check_factorization(f, c):
    assert not f.problems(1e-12)
    np.testing.assert_allclose(sep.compose(f).rows, c.rows, atol=1e-10)


def test_factorize_example1_round_trip():
    c = example1_cpt()
    _check_factorization(sep.factorize(c), c)


def test_factorize_x_only_table():
    rows = np.repeat([[.3, .7], [.2, .8]], 3, axis=0)
    c = Cpt(EXAMPLE1_VARS, rows)
    _check_factorization(sep.factorize(c), c)


def test_factorize_single_variable():
    vars = VariableSet((3,), 2)
    c = Cpt(vars, [[.1, .9], [.5, .5], [1, 0]])
    f = sep.factorize(c)
    np.testing.assert_array_equal(f.gammas, [1])
    np.testing.assert_allclose(f.tables[0], c.rows)


def test_factorize_zero_weight_gets_uniform_table():
    f = factorization(EXAMPLE1_VARS, (1, 0), [[.3, .7], [.2, .8]], [[1, 0], [.4, .6], [.1, .9]])
    c = sep.compose(f)
    out = sep.factorize(c)
    _check_factorization(out, c)
    for g, t in zip(out.gammas, out.tables):
        if g == 0:
            np.testing.assert_allclose(t, 0.5)


def test_factorize_rejects_xor():
    with pytest.raises(NotSeparableError):
        sep.factorize(xor_cpt())


def test_factorize_rejects_invalid_table():
    rows = EXAMPLE1.copy()
    rows[0] *= 1.1
    with pytest.raises(ValueError):
        sep.factorize(Cpt(EXAMPLE1_VARS, rows))


@given(seeds, suite_cards, st.integers(1, 4), st.booleans())
@settings(max_examples=150)
def test_factorize_round_trip(seed, cards, m_z, sparse):
    f = random_factorization(np.random.default_rng(seed), cards, m_z, sparse)
    c = sep.compose(f)
    _check_factorization(sep.factorize(c), c)


@given(seeds, suite_cards)
def test_coefficient_row_sums_blockwise_constant(seed, cards):
    f = random_factorization(np.random.default_rng(seed), cards, 3)
    coef = sep.solve_coefficients(sep.compose(f))
    mass = coef.sum(axis=1)
    for blk in f.vars.blocks():
        assert np.ptp(mass[blk]) <= 1e-8


# approximation

def test_approximate_separable_input():
    c = example1_cpt()
    f, rep = sep.approximate_separable(c)
    assert rep.projection_residual <= 1e-10
    assert rep.repair_deviation == 0
    np.testing.assert_allclose(sep.compose(f).rows, EXAMPLE1, atol=1e-10)


def test_approximate_xor():
    f, rep = sep.approximate_separable(xor_cpt())
    assert rep.projection_residual == pytest.approx(np.sqrt(2), abs=1e-10)
    assert rep.repair_deviation == 0
    for t in f.tables:
        np.testing.assert_allclose(t, 0.5, atol=1e-12)


def test_approximate_mixture_residual_by_linearity():
    c = Cpt(XOR_VARS, MIXED22)
    a = build_basis_matrix(XOR_VARS).entries
    oracle = normal_equations_projection(a, MIXED22)
    np.testing.assert_allclose(oracle, 0.9 * SEP22 + 0.05, atol=1e-12)
    f, rep = sep.approximate_separable(c)
    assert rep.projection_residual == pytest.approx(0.1 * np.sqrt(2), abs=1e-10)
    np.testing.assert_allclose(sep.compose(f).rows, oracle, atol=1e-10)


@given(seeds, st.sampled_from(SUITE_CARDS + [(3, 4), (2, 2, 3)]))
@settings(max_examples=60)
def test_approximation_is_valid_and_separable(seed, cards):
    rng = np.random.default_rng(seed)
    vars = VariableSet(cards, 3)
    c = Cpt(vars, rng.dirichlet(np.full(3, 0.2), size=vars.joint_size))
    f, rep = sep.approximate_separable(c)
    assert not f.problems(1e-12)
    composed = sep.compose(f)
    assert sep.test_separable(composed).separable
    p = sep.project(c)
    np.testing.assert_allclose(np.linalg.norm(p - composed.rows), rep.repair_deviation, atol=1e-9)
    if p.min() >= 0:
        assert rep.repair_deviation == 0


# sufficiency oracle

def test_contrasts_span_left_null_space():
    for cards in SUITE_CARDS:
        vars = VariableSet(cards, 1)
        b = build_event_matrix(vars).entries
        vs = np.array(list(sep.marginal_contrasts(vars)))
        assert len(vs) == vars.joint_size - (sum(cards) - len(cards) + 1)
        assert not np.any(vs @ b)
        assert np.linalg.matrix_rank(vs) == len(vs)


def test_oracle_example1():
    assert sep.sufficiency_oracle(example1_cpt(), trials=50, seed=3)


def test_oracle_xor_witness():
    q1, q2 = sep.sufficiency_witness(xor_cpt())
    np.testing.assert_allclose(q1, [.5, 0, 0, .5])
    np.testing.assert_allclose(q2, [0, .5, .5, 0])
    np.testing.assert_allclose(q1 @ XOR, [1, 0])
    np.testing.assert_allclose(q2 @ XOR, [0, 1])
    assert not sep.sufficiency_oracle(xor_cpt(), trials=10, seed=0)


def test_oracle_single_variable():
    c = Cpt(VariableSet((4,), 3), np.random.default_rng(0).dirichlet(np.ones(3), size=4))
    assert sep.sufficiency_oracle(c, trials=10, seed=0)


@given(seeds, suite_cards, st.booleans())
@settings(max_examples=100)
def test_separable_iff_sufficient(seed, cards, perturb):
    rng = np.random.default_rng(seed)
    c = sep.compose(random_factorization(rng, cards, 3))
    if perturb:
        c = Cpt(c.vars, 0.8 * c.rows + 0.2 * rng.dirichlet(np.ones(3), size=c.vars.joint_size))
    assert sep.test_separable(c).separable == (sep.sufficiency_witness(c) is None)
