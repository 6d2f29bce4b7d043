# %% [markdown]
# # Event matrices
#
# Each row of the event matrix B is one joint outcome of the parents, written
# as one indicator block per variable. The first parent varies slowest.

# %%
import numpy as np

from sepbn.linalg import (VariableSet, build_basis_matrix, build_event_matrix,
                          event_rank, null_space_basis, numerical_rank)

vars = VariableSet((2, 3), target_card=2)
B = build_event_matrix(vars).entries
print(B)

# %% [markdown]
# B has 5 columns but rank 4: adding a constant to block 1 and subtracting it
# from block 2 leaves every row sum unchanged.

# %%
print("rank by formula:", event_rank(vars), " numerical:", numerical_rank(B))
for v in null_space_basis(vars):
    print("null vector", v, "-> B @ v =", B @ v)

# %% [markdown]
# Dropping the last column of every block after the first gives A, which has
# full column rank and the same column space.

# %%
A = build_basis_matrix(vars)
print(A.entries)
print("dropped columns of B:", A.dropped_columns)
print("rank [A | B] =", numerical_rank(np.hstack([A.entries, B])))

# %% [markdown]
# Three parents: rank is sum(m) - n + 1 and there are n - 1 null directions.

# %%
vars3 = VariableSet((2, 3, 4), target_card=2)
print(build_event_matrix(vars3).shape, "rank", event_rank(vars3))
print(np.array(null_space_basis(vars3)))
