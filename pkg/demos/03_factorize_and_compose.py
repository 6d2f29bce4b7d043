# %% [markdown]
# # Factorizing a separable CPT
#
# A separable CPT is a mixture of per-parent tables. The factorization is not
# unique; two different mixtures below give the same table.

# %%
import numpy as np

from sepbn import separability as sep
from sepbn.cpt import Cpt
from sepbn.linalg import VariableSet

vars = VariableSet((2, 3), 2)
first = sep.SeparableFactorization(
    vars, [.5, .5], ([[.3, .7], [.2, .8]], [[1, 0], [.4, .6], [.1, .9]]))
second = sep.SeparableFactorization(
    vars, [.5, .5], ([[.4, .6], [.3, .7]], [[.9, .1], [.3, .7], [0, 1]]))
print(sep.compose(first).rows)
print("same table:", np.allclose(sep.compose(first).rows, sep.compose(second).rows))

# %% [markdown]
# `factorize` recovers some valid mixture from the table alone.

# %%
f = sep.factorize(sep.compose(first))
print("weights", f.gammas)
for t in f.tables:
    print(t)
print("round trip error", np.abs(sep.compose(f).rows - sep.compose(first).rows).max())

# %% [markdown]
# Behind the scenes: solve C = B F, then shift blocks of F by null-space
# vectors until every entry is nonnegative.

# %%
F = sep.solve_coefficients(sep.compose(first))
F[:2] -= 0.4
F[2:] += 0.4
print("shifted F has negatives:", F.min() < 0)
G = sep.repair_negative_columns(F, vars)
print(G)

# %% [markdown]
# Random mixtures over three parents round-trip as well.

# %%
rng = np.random.default_rng(0)
vars3 = VariableSet((2, 3, 4), 3)
tables = tuple(rng.dirichlet(np.ones(3), size=m) for m in vars3.cards)
c3 = sep.compose(sep.SeparableFactorization(vars3, rng.dirichlet(np.ones(3)), tables))
f3 = sep.factorize(c3)
print("weights", f3.gammas, "error", np.abs(sep.compose(f3).rows - c3.rows).max())
