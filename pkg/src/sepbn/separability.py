"""Separability test, factorization and least-squares approximation of CPTs.

A CPT ``C`` is separable when it is a convex mixture of per-parent tables,
``C = sum_i gamma_i * B_i @ C_i`` where ``B_i`` selects variable ``i``'s
block of the event matrix. That holds exactly when the columns of ``C`` lie
in the column space of ``B``, which is checked by orthogonal projection onto
the basis matrix ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .cpt import PROB_TOL, Cpt
from .errors import ConsistencyError, NotSeparableError, RepairInfeasibleError
from .linalg import (DEFAULT_SIZE_LIMIT, VariableSet, build_basis_matrix,
                     build_event_matrix, kept_columns, variable_selector)

SEPARABLE_TOL = 1e-9
REPAIR_TOL = 1e-10
BLOCK_CONSTANCY_TOL = 1e-8
ZERO_WEIGHT_EPS = 1e-10
ORACLE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SeparableFactorization:
    """Mixing weights and per-parent tables; table ``i`` is ``m_i x m_z``."""

    vars: VariableSet
    gammas: np.ndarray
    tables: tuple[np.ndarray, ...]

    def __post_init__(self):
        gammas = np.array(self.gammas, dtype=float).reshape(-1)
        if gammas.size != self.vars.n:
            raise ValueError(f"expected {self.vars.n} weights, got {gammas.size}")
        if len(self.tables) != self.vars.n:
            raise ValueError(f"expected {self.vars.n} tables, got {len(self.tables)}")
        tables = []
        for i, (t, m) in enumerate(zip(self.tables, self.vars.cards)):
            t = np.array(t, dtype=float)
            if t.shape != (m, self.vars.target_card):
                raise ValueError(f"table {i} has shape {t.shape}, "
                                 f"expected {(m, self.vars.target_card)}")
            t.setflags(write=False)
            tables.append(t)
        gammas.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "tables", tuple(tables))

    def problems(self, tol: float = PROB_TOL) -> list[str]:
        out = []
        if self.gammas.min() < -tol:
            out.append(f"negative weight {self.gammas.min():.3g}")
        if abs(self.gammas.sum() - 1) > tol:
            out.append(f"weights sum to {self.gammas.sum():.15g}")
        for i, t in enumerate(self.tables):
            if t.min() < -tol:
                out.append(f"table {i} has negative entry {t.min():.3g}")
            dev = np.abs(t.sum(axis=1) - 1)
            if dev.max() > tol:
                out.append(f"table {i} rows {np.flatnonzero(dev > tol).tolist()} do not sum to 1")
        return out

    def require_valid(self, tol: float = PROB_TOL) -> "SeparableFactorization":
        problems = self.problems(tol)
        if problems:
            raise ValueError("invalid factorization: " + "; ".join(problems))
        return self


@dataclass(frozen=True)
class SeparabilityVerdict:
    separable: bool
    residual: float
    tol: float

    def __bool__(self):
        return self.separable


@dataclass(frozen=True)
class ApproximationReport:
    projection_residual: float
    repair_deviation: float
    iterations: int


@lru_cache(maxsize=32)
def _basis_qr(vars):
    a = build_basis_matrix(vars, limit=None).entries.astype(float)
    q, r = np.linalg.qr(a)
    q.setflags(write=False)
    r.setflags(write=False)
    return q, r


def _project_rows(vars, rows):
    q, _ = _basis_qr(vars)
    return q @ (q.T @ rows)


def project(c: Cpt) -> np.ndarray:
    """Orthogonal projection of each column of ``c`` onto the range of ``B``."""
    c.vars.check_size(DEFAULT_SIZE_LIMIT)
    return _project_rows(c.vars, c.rows)


def _verdict(rows, projected, tol):
    residual = float(np.linalg.norm(rows - projected))
    scale = max(1.0, float(np.linalg.norm(rows)))
    return SeparabilityVerdict(residual <= tol * scale, residual, tol)


def test_separable(c: Cpt, tol: float = SEPARABLE_TOL) -> SeparabilityVerdict:
    """Separable iff the projection residual is within ``tol * max(1, ||C||_F)``."""
    return _verdict(c.rows, project(c), tol)


test_separable.__test__ = False  # keep pytest from collecting it


def compose(f: SeparableFactorization) -> Cpt:
    """Mix the per-parent tables back into a full CPT."""
    rows = np.zeros((f.vars.joint_size, f.vars.target_card))
    for i, (g, t) in enumerate(zip(f.gammas, f.tables)):
        rows += g * (variable_selector(f.vars, i) @ t)
    return Cpt(f.vars, rows)


def solve_coefficients(c: Cpt, tol: float = SEPARABLE_TOL) -> np.ndarray:
    """Return ``F`` with ``B @ F == C``, zero on the columns ``A`` omits."""
    c.vars.check_size(DEFAULT_SIZE_LIMIT)
    q, r = _basis_qr(c.vars)
    coef = np.linalg.solve(r, q.T @ c.rows)
    verdict = _verdict(c.rows, q @ (q.T @ c.rows), tol)
    if not verdict.separable:
        raise NotSeparableError(verdict.residual, tol)
    f = np.zeros((c.vars.total_card, c.vars.target_card))
    f[kept_columns(c.vars)] = coef
    return f


def repair_negative_columns(f, vars: VariableSet, tol: float = REPAIR_TOL) -> np.ndarray:
    """Shift each column of ``f`` by a null-space vector of ``B`` to make it nonnegative.

    Blocks whose minimum is negative are raised by exactly that amount; the
    total is taken back from the remaining blocks, largest minimum first,
    without pushing any of them below zero.
    """
    f = np.array(f, dtype=float)
    if f.shape[0] != vars.total_card:
        raise ValueError(f"F has {f.shape[0]} rows, expected {vars.total_card}")
    blocks = vars.blocks()
    for z in range(f.shape[1]):
        col = f[:, z]
        if col.min() >= 0:
            continue
        mins = np.array([col[b].min() for b in blocks])
        neg = mins < 0
        alpha = np.where(neg, -mins, 0.0)
        need = alpha.sum()
        donors = sorted(np.flatnonzero(~neg), key=lambda i: (-mins[i], i))
        for i in donors:
            take = min(mins[i], need)
            alpha[i] = -take
            need -= take
            if need <= 0:
                break
        if need > tol:
            raise RepairInfeasibleError(z, need)
        if need > 0:
            # rounding leftover; keeps the shift summing to zero
            alpha[int(np.argmax(mins))] -= need
        for a, b in zip(alpha, blocks):
            col[b] += a
    return f


def factorize(c: Cpt, tol: float = SEPARABLE_TOL,
              eps: float = ZERO_WEIGHT_EPS) -> SeparableFactorization:
    """Split a separable CPT into mixing weights and per-parent tables.

    Weights at or below ``eps`` are set to zero and their table replaced by
    the uniform one. The result is not unique; this returns the one produced
    by the canonical basis and greedy repair order.
    """
    c.require_valid()
    vars = c.vars
    f = repair_negative_columns(solve_coefficients(c, tol), vars)
    f = np.clip(f, 0.0, None)
    row_mass = f.sum(axis=1)
    m_z = vars.target_card
    gammas = np.zeros(vars.n)
    tables = []
    for i, b in enumerate(vars.blocks()):
        mass = row_mass[b]
        if np.ptp(mass) > BLOCK_CONSTANCY_TOL:
            raise ConsistencyError(
                f"row sums of block {i} vary by {np.ptp(mass):.3g}; expected a constant")
        g = float(mass.mean())
        table = np.full((vars.cards[i], m_z), 1.0 / m_z)
        if g > eps:
            gammas[i] = g
            ok = mass > 0
            table[ok] = f[b][ok] / mass[ok, None]
        tables.append(table)
    if gammas.sum() <= 0:
        raise ConsistencyError("all mixing weights vanished")
    result = SeparableFactorization(vars, gammas / gammas.sum(), tuple(tables))
    err = np.abs(compose(result).rows - c.rows).max()
    if err > max(1e-6, 10 * tol):
        raise ConsistencyError(f"factorization reproduces the table only to {err:.3g}")
    return result


def _shrink_toward_uniform(rows):
    u = 1.0 / rows.shape[1]
    low = rows.min()
    if low >= 0:
        return rows
    t = u / (u - low)
    return np.clip(u + t * (rows - u), 0.0, None)


def approximate_separable(c: Cpt, tol: float = SEPARABLE_TOL, max_iter: int = 500):
    """Least-squares separable approximation of an arbitrary CPT.

    The projection onto the range of ``B`` can have negative entries. When it
    does, negatives are clamped, rows renormalized and the result projected
    again until the projection is nonnegative (or ``max_iter`` runs out, after
    which the last projection is pulled toward the uniform table just far
    enough to clear its negatives). Returns the factorization of the repaired
    table and an :class:`ApproximationReport`.
    """
    c.require_valid()
    vars = c.vars
    projected = project(c)
    residual = float(np.linalg.norm(c.rows - projected))
    current = projected
    iterations = 0
    while current.min() < -PROB_TOL and iterations < max_iter:
        clamped = np.clip(current, 0.0, None)
        clamped /= clamped.sum(axis=1, keepdims=True)
        current = _project_rows(vars, clamped)
        iterations += 1
    if current.min() < -PROB_TOL:
        current = _shrink_toward_uniform(current)
    repaired = Cpt(vars, current)
    report = ApproximationReport(residual, float(np.linalg.norm(projected - current)),
                                 iterations)
    return factorize(repaired, tol), report


def marginal_contrasts(vars: VariableSet):
    """Yield an integer basis of joint-space directions that leave every marginal unchanged.

    Each vector is a Kronecker product with one factor per variable, either
    all-ones or ``e_1 - e_k``, with at least two difference factors. They span
    the left null space of ``B`` (dimension ``prod(m) - rank(B)``).
    """
    factors = []
    for m in vars.cards:
        opts = [np.ones(m, dtype=np.int64)]
        for k in range(1, m):
            d = np.zeros(m, dtype=np.int64)
            d[0], d[k] = 1, -1
            opts.append(d)
        factors.append(opts)
    for choice in product(*(range(m) for m in vars.cards)):
        if sum(1 for k in choice if k > 0) < 2:
            continue
        v = np.ones(1, dtype=np.int64)
        for opts, k in zip(factors, choice):
            v = np.kron(v, opts[k])
        yield v


def sufficiency_witness(c: Cpt, tol: float = ORACLE_TOL):
    """Find two joint PMFs with equal parent marginals but different target marginals.

    Each marginal-preserving contrast ``v`` is split into positive and
    negative parts, both normalized to PMFs; those share all marginals, so
    a sufficient table must map them to the same target PMF. Returns the
    first offending ``(q1, q2)`` pair, or ``None``. Checking every contrast
    is conclusive because sufficiency is linear in ``v``.
    """
    for v in marginal_contrasts(c.vars):
        pos = np.clip(v, 0, None).astype(float)
        neg = np.clip(-v, 0, None).astype(float)
        d = pos.sum()
        q1, q2 = pos / d, neg / d
        if np.abs(q1 @ c.rows - q2 @ c.rows).max() > tol:
            return q1, q2
    return None


def sufficiency_oracle(c: Cpt, trials: int = 100, seed: int = 0,
                       tol: float = ORACLE_TOL) -> bool:
    """Test-support check of sufficiency straight from its definition.

    Draws ``trials`` random joint PMFs and random marginal-preserving
    perturbations of them, then runs the deterministic contrast sweep of
    :func:`sufficiency_witness`. ``False`` means a counterexample was found.
    """
    rng = np.random.default_rng(seed)
    contrasts = list(marginal_contrasts(c.vars))
    mu = c.vars.joint_size
    if contrasts:
        basis = np.array(contrasts, dtype=float)
        for _ in range(trials):
            q1 = rng.dirichlet(np.ones(mu))
            v = rng.standard_normal(len(basis)) @ basis
            if not np.any(v < 0):
                continue
            s = rng.uniform(0.5, 1.0) * np.min(q1[v < 0] / -v[v < 0])
            q2 = q1 + s * v
            if np.abs(q1 @ c.rows - q2 @ c.rows).max() > tol:
                return False
    return sufficiency_witness(c, tol) is None
