# %% [markdown]
# # Approximating a non-separable CPT
#
# The projection onto the separable subspace is the least-squares closest
# point. It keeps unit row sums but can go negative; those tables are repaired
# and the deviation reported separately.

# %%
import numpy as np

from sepbn import separability as sep
from sepbn.cpt import Cpt
from sepbn.linalg import VariableSet

vars = VariableSet((2, 2), 2)
separable = np.array([[.65, .35], [.35, .65], [.60, .40], [.30, .70]])
xor = np.array([[1., 0.], [0., 1.], [0., 1.], [1., 0.]])
mixed = Cpt(vars, 0.9 * separable + 0.1 * xor)
f, report = sep.approximate_separable(mixed)
print(report)
print("expected residual 0.1 * sqrt(2) =", 0.1 * np.sqrt(2))
print(sep.compose(f).rows)

# %% [markdown]
# A sparse random table whose projection has negative entries.

# %%
rng = np.random.default_rng(3)
vars = VariableSet((3, 3), 3)
c = Cpt(vars, rng.dirichlet(np.full(3, 0.2), size=9))
print("most negative projected entry:", sep.project(c).min())
f, report = sep.approximate_separable(c)
print(report)
print("approximation is separable:", sep.test_separable(sep.compose(f)).separable)
