"""Influence model: networked Markov chains with mixed pairwise influence.

Site ``i``'s next-status PMF is ``sum_j D[i, j] * s_j @ A[i, j]`` where
``s_j`` is site ``j``'s current status indicator and ``A[i, j]`` is an
``m_j x m_i`` row-stochastic table. Sites are 0-based; statuses are 0-based
inside the library.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .cpt import PROB_TOL, Cpt, validate_pmf
from .errors import SizeLimitError
from .separability import SeparableFactorization

ORACLE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class InfluenceModel:
    """Influence matrix ``D`` plus local tables keyed by ``(to, from)``.

    Tables are required only where ``D[to, from] > 0``.
    """

    site_cards: tuple[int, ...]
    D: np.ndarray
    local: dict = field(default_factory=dict)
    site_names: tuple[str, ...] | None = None

    def __post_init__(self):
        cards = tuple(int(m) for m in self.site_cards)
        n = len(cards)
        if n == 0 or min(cards) < 1:
            raise ValueError(f"invalid site cardinalities {cards}")
        d = np.array(self.D, dtype=float)
        if d.shape != (n, n):
            raise ValueError(f"D has shape {d.shape}, expected {(n, n)}")
        if d.min() < -PROB_TOL or np.abs(d.sum(axis=1) - 1).max() > PROB_TOL:
            raise ValueError("D must be nonnegative with unit row sums")
        local = {}
        for (i, j), a in self.local.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"table ({i}, {j}) refers to a missing site")
            a = np.array(a, dtype=float)
            if a.shape != (cards[j], cards[i]):
                raise ValueError(f"table ({i}, {j}) has shape {a.shape}, "
                                 f"expected {(cards[j], cards[i])}")
            if a.min() < -PROB_TOL or np.abs(a.sum(axis=1) - 1).max() > PROB_TOL:
                raise ValueError(f"table ({i}, {j}) is not row-stochastic")
            a.setflags(write=False)
            local[(int(i), int(j))] = a
        for i, j in zip(*np.nonzero(d > 0)):
            if (int(i), int(j)) not in local:
                raise ValueError(f"D[{i}, {j}] > 0 but no table from site {j} to site {i}")
        d.setflags(write=False)
        object.__setattr__(self, "site_cards", cards)
        object.__setattr__(self, "D", d)
        object.__setattr__(self, "local", local)

    @property
    def n_sites(self) -> int:
        return len(self.site_cards)

    @property
    def joint_size(self) -> int:
        return prod(self.site_cards)

    def influences(self, i):
        """``(j, weight, table)`` for every site with positive weight on site ``i``."""
        return [(j, self.D[i, j], self.local[(i, j)])
                for j in np.flatnonzero(self.D[i] > 0)]


@dataclass(frozen=True)
class NetworkState:
    """Current status of every site, 0-based."""

    statuses: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "statuses", tuple(int(s) for s in self.statuses))

    def check(self, model: InfluenceModel) -> "NetworkState":
        if len(self.statuses) != model.n_sites:
            raise ValueError(f"state has {len(self.statuses)} sites, model has {model.n_sites}")
        for s, m in zip(self.statuses, model.site_cards):
            if not 0 <= s < m:
                raise ValueError(f"status {s} outside 0..{m - 1}")
        return self


def step_marginals(model: InfluenceModel, marginals) -> list[np.ndarray]:
    """Advance per-site marginals by one step.

    Exact: the update is linear in the status indicators, so it carries over
    to their expectations.
    """
    if len(marginals) != model.n_sites:
        raise ValueError(f"got {len(marginals)} marginals for {model.n_sites} sites")
    ps = []
    for p, m in zip(marginals, model.site_cards):
        p = validate_pmf(p, tol=1e-9)
        if p.size != m:
            raise ValueError(f"marginal of length {p.size} for a site with {m} statuses")
        ps.append(p)
    out = []
    for i, m in enumerate(model.site_cards):
        nxt = np.zeros(m)
        for j, w, a in model.influences(i):
            nxt += w * (ps[j] @ a)
        out.append(nxt)
    return out


def iterate_marginals(model: InfluenceModel, marginals, steps: int) -> list[list[np.ndarray]]:
    """Marginals at steps ``0..steps`` inclusive."""
    history = [[np.asarray(p, dtype=float) for p in marginals]]
    for _ in range(steps):
        history.append(step_marginals(model, history[-1]))
    return history


def next_state_pmfs(model: InfluenceModel, state: NetworkState) -> list[np.ndarray]:
    state.check(model)
    out = []
    for i, m in enumerate(model.site_cards):
        nxt = np.zeros(m)
        for j, w, a in model.influences(i):
            nxt += w * a[state.statuses[j]]
        out.append(nxt)
    return out


def _inverse_cdf(p, u):
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)


def sample_step(model: InfluenceModel, state: NetworkState, rng) -> NetworkState:
    """Draw the next state; one uniform from ``rng`` per site, in site order."""
    pmfs = next_state_pmfs(model, state)
    u = rng.random(model.n_sites)
    return NetworkState(tuple(int(_inverse_cdf(p, x)) for p, x in zip(pmfs, u)))


def sample_next_states(model: InfluenceModel, state: NetworkState, rng, size: int) -> np.ndarray:
    """``size`` independent draws of the next state, as a ``(size, n_sites)`` array."""
    pmfs = next_state_pmfs(model, state)
    u = rng.random((size, model.n_sites))
    return np.column_stack([_inverse_cdf(p, u[:, i]) for i, p in enumerate(pmfs)])


def sample_trajectory(model: InfluenceModel, state: NetworkState, steps: int,
                      seed: int) -> list[NetworkState]:
    """Seeded trajectory of ``steps + 1`` states starting at ``state``.

    Site ``i`` at step ``k`` draws from its own stream, spawned from
    ``seed`` with key ``(k, i)``, so trajectories are reproducible and
    independent of how many sites are sampled elsewhere.
    """
    traj = [state.check(model)]
    for k in range(steps):
        pmfs = next_state_pmfs(model, traj[-1])
        nxt = []
        for i, p in enumerate(pmfs):
            ss = np.random.SeedSequence(seed, spawn_key=(k, i))
            u = np.random.default_rng(ss).random()
            nxt.append(int(_inverse_cdf(p, u)))
        traj.append(NetworkState(tuple(nxt)))
    return traj


def from_separable_dbn(nodes) -> InfluenceModel:
    """Assemble an influence model from per-node ``(parents, factorization)`` pairs.

    Node ``i``'s weights fill row ``i`` of ``D`` at its parents' positions
    and its per-parent tables become the local tables into site ``i``.
    """
    nodes = list(nodes)
    n = len(nodes)
    cards = []
    for i, node in enumerate(nodes):
        if not isinstance(node[1], SeparableFactorization):
            raise TypeError(f"node {i} has no factorization")
        cards.append(node[1].vars.target_card)
    d = np.zeros((n, n))
    local = {}
    for i, (parents, f) in enumerate(nodes):
        parents = [int(p) for p in parents]
        if len(set(parents)) != len(parents):
            raise ValueError(f"node {i} lists a parent twice")
        if len(parents) != f.vars.n:
            raise ValueError(f"node {i} has {len(parents)} parents but its "
                             f"factorization has {f.vars.n} variables")
        for k, j in enumerate(parents):
            if not 0 <= j < n:
                raise ValueError(f"node {i} parent {j} is not a node")
            if f.vars.cards[k] != cards[j]:
                raise ValueError(f"node {i} parent {j} has {cards[j]} statuses, "
                                 f"factorization expects {f.vars.cards[k]}")
            d[i, j] = f.gammas[k]
            local[(i, j)] = f.tables[k]
    return InfluenceModel(tuple(cards), d, local)


def _joint_states(cards):
    return np.array(np.unravel_index(np.arange(prod(cards)), cards)).T


def _rowwise_kron(pmfs):
    out = pmfs[0]
    for p in pmfs[1:]:
        out = (out[:, :, None] * p[:, None, :]).reshape(out.shape[0], -1)
    return out


def _joint_transition(cards, site_pmf_fn, limit):
    size = prod(cards)
    if size > limit:
        raise SizeLimitError(size, limit)
    states = _joint_states(cards)
    return _rowwise_kron([site_pmf_fn(i, states) for i in range(len(cards))])


def joint_transition_matrix(model: InfluenceModel, limit: int = ORACLE_LIMIT) -> np.ndarray:
    """Transition matrix of the full product-space chain, first site slowest."""
    def site_pmf(i, states):
        out = np.zeros((len(states), model.site_cards[i]))
        for j, w, a in model.influences(i):
            out += w * a[states[:, j]]
        return out
    return _joint_transition(model.site_cards, site_pmf, limit)


def dbn_transition_matrix(nodes, limit: int = ORACLE_LIMIT) -> np.ndarray:
    """Transition matrix of a DBN given as ``(parents, Cpt)`` pairs.

    Works from the full CPTs, without any factorization.
    """
    nodes = [(list(p), c) for p, c in nodes]
    cards = tuple(c.vars.target_card for _, c in nodes)

    def site_pmf(i, states):
        parents, c = nodes[i]
        idx = np.ravel_multi_index(tuple(states[:, j] for j in parents), c.vars.cards)
        return c.rows[idx]
    return _joint_transition(cards, site_pmf, limit)


def site_marginals(joint, cards) -> list[np.ndarray]:
    t = np.asarray(joint).reshape(cards)
    axes = range(len(cards))
    return [t.sum(axis=tuple(a for a in axes if a != i)) for i in axes]


def product_joint(marginals) -> np.ndarray:
    out = np.ones(1)
    for p in marginals:
        out = np.kron(out, np.asarray(p, dtype=float))
    return out


def _run_chain(t, cards, initial, steps, history):
    q = validate_pmf(initial, tol=1e-9)
    if q.size != t.shape[0]:
        raise ValueError(f"initial joint PMF has length {q.size}, expected {t.shape[0]}")
    out = [site_marginals(q, cards)]
    for _ in range(steps):
        q = q @ t
        out.append(site_marginals(q, cards))
    return out if history else out[-1]


def exact_joint_oracle(model: InfluenceModel, initial, steps: int, *,
                       limit: int = ORACLE_LIMIT, history: bool = False):
    """Site marginals after ``steps`` steps of the exact joint chain.

    ``initial`` is a joint PMF in first-site-slowest order. With
    ``history=True`` the marginals of every step ``0..steps`` are returned.
    """
    t = joint_transition_matrix(model, limit)
    return _run_chain(t, model.site_cards, initial, steps, history)


def exact_dbn_oracle(nodes, initial, steps: int, *, limit: int = ORACLE_LIMIT,
                     history: bool = False):
    """Like :func:`exact_joint_oracle` but for a DBN of full CPTs."""
    nodes = [(list(p), c) for p, c in nodes]
    for i, (_, c) in enumerate(nodes):
        if not isinstance(c, Cpt):
            raise TypeError(f"node {i} needs a Cpt")
    cards = tuple(c.vars.target_card for _, c in nodes)
    t = dbn_transition_matrix(nodes, limit)
    return _run_chain(t, cards, initial, steps, history)
