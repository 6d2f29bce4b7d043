"""Event matrices and their column-space bases.

For parent variables with cardinalities ``m_1, ..., m_n`` the event matrix
``B`` has one row per joint outcome and one 0/1 indicator block per variable.
Rows are stacked with variable 1 varying slowest::

    B_1 = I_{m_1}
    B_i = [B_{i-1} kron 1_{m_i} | 1_{mu_{i-1}} kron I_{m_i}]

The basis matrix ``A`` is built the same way but keeps only the first
``m_i - 1`` identity columns for ``i >= 2``, which leaves a full column rank
matrix spanning the same column space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

import numpy as np

from .errors import SizeLimitError

DEFAULT_SIZE_LIMIT = 10_000
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class VariableSet:
    """Parent cardinalities plus the target cardinality.

    ``names`` and ``target_name`` are labels only and do not take part in
    equality.
    """

    cards: tuple[int, ...]
    target_card: int
    names: tuple[str, ...] | None = field(default=None, compare=False)
    target_name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        cards = tuple(int(m) for m in self.cards)
        if len(cards) == 0:
            raise ValueError("need at least one parent variable")
        if any(m < 1 for m in cards):
            raise ValueError(f"cardinalities must be >= 1, got {cards}")
        if int(self.target_card) < 1:
            raise ValueError(f"target cardinality must be >= 1, got {self.target_card}")
        if self.names is not None and len(self.names) != len(cards):
            raise ValueError("one name per parent variable is required")
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "target_card", int(self.target_card))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return len(self.cards)

    @property
    def joint_size(self) -> int:
        return prod(self.cards)

    @property
    def block_offsets(self) -> tuple[int, ...]:
        """Start column of each variable's block in the event matrix."""
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.cards)[:-1]]))

    @property
    def total_card(self) -> int:
        return sum(self.cards)

    def blocks(self) -> list[slice]:
        return [slice(o, o + m) for o, m in zip(self.block_offsets, self.cards)]

    def check_size(self, limit: int | None = DEFAULT_SIZE_LIMIT) -> None:
        if limit is not None and self.joint_size > limit:
            raise SizeLimitError(self.joint_size, limit)


def as_variable_set(obj, target_card: int = 1) -> VariableSet:
    if isinstance(obj, VariableSet):
        return obj
    return VariableSet(tuple(obj), target_card)


@dataclass(frozen=True, eq=False)
class EventMatrix:
    entries: np.ndarray
    block_offsets: tuple[int, ...]

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class BasisMatrix:
    entries: np.ndarray
    dropped_columns: tuple[int, ...]

    @property
    def shape(self):
        return self.entries.shape


def _readonly(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def _event_entries(cards):
    b = np.eye(cards[0], dtype=np.int64)
    mu = cards[0]
    for m in cards[1:]:
        b = np.hstack([np.kron(b, np.ones((m, 1), dtype=np.int64)),
                       np.kron(np.ones((mu, 1), dtype=np.int64), np.eye(m, dtype=np.int64))])
        mu *= m
    return _readonly(b)


@lru_cache(maxsize=64)
def _basis_entries(cards):
    a = np.eye(cards[0], dtype=np.int64)
    mu = cards[0]
    for m in cards[1:]:
        a = np.hstack([np.kron(a, np.ones((m, 1), dtype=np.int64)),
                       np.kron(np.ones((mu, 1), dtype=np.int64),
                               np.eye(m, dtype=np.int64)[:, :m - 1])])
        mu *= m
    return _readonly(a)


def build_event_matrix(vars, limit: int | None = DEFAULT_SIZE_LIMIT) -> EventMatrix:
    """Return the event matrix ``B`` for ``vars``.

    >>> build_event_matrix([2, 2]).entries.tolist()
    [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1]]
    """
    vars = as_variable_set(vars)
    vars.check_size(limit)
    return EventMatrix(_event_entries(vars.cards), vars.block_offsets)


def build_basis_matrix(vars, limit: int | None = DEFAULT_SIZE_LIMIT) -> BasisMatrix:
    """Return the full column rank basis ``A`` of the event matrix's range.

    ``A`` equals ``B`` with the last column of every block after the first
    removed; ``dropped_columns`` lists those columns in ``B`` coordinates.
    """
    vars = as_variable_set(vars)
    vars.check_size(limit)
    offsets = vars.block_offsets
    dropped = tuple(offsets[i] + vars.cards[i] - 1 for i in range(1, vars.n))
    return BasisMatrix(_basis_entries(vars.cards), dropped)


def kept_columns(vars) -> np.ndarray:
    """Indices of the event-matrix columns that survive in the basis matrix."""
    vars = as_variable_set(vars)
    dropped = set(build_basis_matrix(vars, limit=None).dropped_columns)
    return np.array([j for j in range(vars.total_card) if j not in dropped], dtype=np.int64)


def event_rank(vars) -> int:
    """Rank of the event matrix by formula: ``sum(m_i) - n + 1``."""
    vars = as_variable_set(vars)
    return vars.total_card - vars.n + 1


def numerical_rank(m, rtol: float = RANK_RTOL) -> int:
    """Count singular values above ``rtol`` times the largest one."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def verify_event_rank(vars, rtol: float = RANK_RTOL) -> bool:
    """Check the rank formula against an SVD of the event matrix."""
    return numerical_rank(build_event_matrix(vars).entries, rtol) == event_rank(vars)


def null_space_basis(vars) -> list[np.ndarray]:
    """Integer basis of the right null space of ``B``.

    For ``k = 2..n`` the vector is +1 on block 1, -1 on block ``k`` and zero
    elsewhere. A single variable has a trivial null space.
    """
    vars = as_variable_set(vars)
    blocks = vars.blocks()
    out = []
    for k in range(1, vars.n):
        v = np.zeros(vars.total_card, dtype=np.int64)
        v[blocks[0]] = 1
        v[blocks[k]] = -1
        out.append(v)
    return out


def variable_selector(vars, i: int, limit: int | None = DEFAULT_SIZE_LIMIT) -> np.ndarray:
    """Columns of ``B`` belonging to variable ``i`` (0-based).

    A joint PMF ``q`` gives the marginal of variable ``i`` as
    ``q @ variable_selector(vars, i)``.
    """
    vars = as_variable_set(vars)
    if not 0 <= i < vars.n:
        raise IndexError(f"variable index {i} out of range for {vars.n} variables")
    return build_event_matrix(vars, limit).entries[:, vars.blocks()[i]]
