"""Shared fixtures data and independent oracles for the test suite."""

from itertools import product

import numpy as np

from sepbn.cpt import Cpt
from sepbn.linalg import VariableSet
from sepbn.separability import SeparableFactorization

# Example 1 table and its two published factorizations
EXAMPLE1 = np.array([[.65, .35], [.35, .65], [.20, .80],
                     [.60, .40], [.30, .70], [.15, .85]])
EXAMPLE1_VARS = VariableSet((2, 3), 2)
EXAMPLE1_FACTORS = [
    ((.5, .5), [[.3, .7], [.2, .8]], [[1, 0], [.4, .6], [.1, .9]]),
    ((.5, .5), [[.4, .6], [.3, .7]], [[.9, .1], [.3, .7], [0, 1]]),
]

XOR = np.array([[1., 0.], [0., 1.], [0., 1.], [1., 0.]])
XOR_VARS = VariableSet((2, 2), 2)

# Example 1 restricted to Y in {1, 2}; separable with gamma (.5, .5)
SEP22 = np.array([[.65, .35], [.35, .65], [.60, .40], [.30, .70]])
MIXED22 = 0.9 * SEP22 + 0.1 * XOR

PAPER_B23 = np.array([[1, 0, 1, 0, 0],
                      [1, 0, 0, 1, 0],
                      [1, 0, 0, 0, 1],
                      [0, 1, 1, 0, 0],
                      [0, 1, 0, 1, 0],
                      [0, 1, 0, 0, 1]])

SUITE_CARDS = [(2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 3, 4)]


def example1_cpt():
    return Cpt(EXAMPLE1_VARS, EXAMPLE1)


def xor_cpt():
    return Cpt(XOR_VARS, XOR)


def factorization(vars, gammas, *tables):
    return SeparableFactorization(vars, np.array(gammas), tuple(np.array(t, float) for t in tables))


def brute_event_matrix(cards):
    """Event matrix by enumerating joint outcomes, first variable slowest."""
    offsets = np.concatenate([[0], np.cumsum(cards)[:-1]])
    rows = []
    for outcome in product(*(range(m) for m in cards)):
        r = np.zeros(sum(cards), dtype=np.int64)
        for o, x in zip(offsets, outcome):
            r[o + x] = 1
        rows.append(r)
    return np.array(rows)


def brute_compose(vars, gammas, tables):
    """Mixture evaluated row by row from the outcome tuple."""
    rows = []
    for outcome in product(*(range(m) for m in vars.cards)):
        rows.append(sum(g * np.asarray(t)[x] for g, t, x in zip(gammas, tables, outcome)))
    return np.array(rows)


def normal_equations_projection(a, c):
    """Projection written with the explicit inverse of A'A."""
    a = np.asarray(a, dtype=float)
    return a @ np.linalg.inv(a.T @ a) @ a.T @ c


def random_factorization(rng, cards, m_z, sparse=False):
    vars = VariableSet(tuple(cards), m_z)
    alpha = 0.3 if sparse else 1.0
    gammas = rng.dirichlet(np.full(len(cards), alpha))
    tables = [rng.dirichlet(np.full(m_z, alpha), size=m) for m in cards]
    return SeparableFactorization(vars, gammas, tuple(tables))


def random_cpt(rng, cards, m_z):
    vars = VariableSet(tuple(cards), m_z)
    return Cpt(vars, rng.dirichlet(np.ones(m_z), size=vars.joint_size))


def random_card_list(rng, max_n=4, max_m=6):
    n = int(rng.integers(1, max_n + 1))
    return tuple(int(m) for m in rng.integers(1, max_m + 1, size=n))
