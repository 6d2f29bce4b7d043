"""PMFs and conditional probability tables in event-matrix row order.

A PMF is a plain 1-D float array. A CPT stores one row per joint parent
outcome, ordered with the first parent varying slowest, and one column per
target outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import VariableSet, variable_selector

PROB_TOL = 1e-12


def validate_pmf(p, tol: float = PROB_TOL) -> np.ndarray:
    """Return ``p`` as a float array, raising ``ValueError`` unless it is a PMF."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"PMF must be a non-empty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("PMF has non-finite entries")
    if p.min() < -tol:
        raise ValueError(f"PMF has negative entry {p.min():.3g}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"PMF sums to {p.sum():.15g}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class Cpt:
    """Row-stochastic table of ``P(target | parents)``.

    Only the shape is checked on construction; use :func:`validate_cpt` or
    :meth:`require_valid` for the probability constraints.
    """

    vars: VariableSet
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        expected = (self.vars.joint_size, self.vars.target_card)
        if rows.shape != expected:
            raise ValueError(f"CPT rows have shape {rows.shape}, expected {expected}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def require_valid(self, tol: float = PROB_TOL) -> "Cpt":
        report = validate_cpt(self, tol)
        if not report.ok:
            raise ValueError(report.describe())
        return self

    def row(self, outcome) -> np.ndarray:
        return self.rows[row_index(outcome, self.vars)]


@dataclass(frozen=True)
class ValidationReport:
    row_sum_deviation: np.ndarray
    most_negative: float
    tol: float

    @property
    def max_row_deviation(self) -> float:
        return float(np.max(np.abs(self.row_sum_deviation)))

    @property
    def bad_rows(self) -> list[int]:
        return [int(r) for r in np.flatnonzero(np.abs(self.row_sum_deviation) > self.tol)]

    @property
    def ok(self) -> bool:
        return (self.max_row_deviation <= self.tol
                and self.most_negative >= -self.tol
                and np.all(np.isfinite(self.row_sum_deviation)))

    def describe(self) -> str:
        if self.ok:
            return "CPT is valid"
        parts = []
        if self.bad_rows:
            parts.append(f"rows {self.bad_rows} do not sum to 1 "
                         f"(max deviation {self.max_row_deviation:.3g})")
        if self.most_negative < -self.tol:
            parts.append(f"most negative entry {self.most_negative:.3g}")
        return "invalid CPT: " + "; ".join(parts or ["non-finite entries"])


def validate_cpt(c: Cpt, tol: float = PROB_TOL) -> ValidationReport:
    rows = c.rows
    return ValidationReport(row_sum_deviation=rows.sum(axis=1) - 1.0,
                            most_negative=float(min(rows.min(), 0.0)),
                            tol=tol)


def row_index(outcome, vars: VariableSet) -> int:
    """Zero-based row of a joint outcome given with 1-based components.

    >>> row_index((2, 1), VariableSet((2, 3), 2))
    3
    """
    outcome = tuple(int(x) for x in outcome)
    if len(outcome) != vars.n:
        raise ValueError(f"outcome has {len(outcome)} components, expected {vars.n}")
    idx = 0
    for x, m in zip(outcome, vars.cards):
        if not 1 <= x <= m:
            raise ValueError(f"outcome component {x} outside 1..{m}")
        idx = idx * m + (x - 1)
    return idx


def outcome_of(index: int, vars: VariableSet) -> tuple[int, ...]:
    """Inverse of :func:`row_index`; returns 1-based components."""
    if not 0 <= index < vars.joint_size:
        raise ValueError(f"row index {index} outside 0..{vars.joint_size - 1}")
    return tuple(int(x) + 1 for x in np.unravel_index(index, vars.cards))


def all_outcomes(vars: VariableSet):
    """Every joint outcome in row order."""
    return product(*(range(1, m + 1) for m in vars.cards))


def _joint_pmf(q, vars):
    q = validate_pmf(q)
    if q.size != vars.joint_size:
        raise ValueError(f"joint PMF has length {q.size}, expected {vars.joint_size}")
    return q


def joint_marginals(q, vars: VariableSet) -> list[np.ndarray]:
    q = _joint_pmf(q, vars)
    return [q @ variable_selector(vars, i, limit=None) for i in range(vars.n)]


def push_forward(q, c: Cpt) -> np.ndarray:
    """Target marginal ``q @ C`` induced by a joint parent PMF."""
    q = _joint_pmf(q, c.vars)
    return q @ c.rows
