"""Separable Bayesian network tools: event matrices, separability tests,
CPT factorization and the influence model."""

from .cpt import Cpt, joint_marginals, push_forward, row_index, validate_cpt
from .errors import (ConsistencyError, NotSeparableError, RepairInfeasibleError,
                     SepbnError, SizeLimitError)
from .influence import (InfluenceModel, NetworkState, exact_joint_oracle,
                        from_separable_dbn, sample_step, step_marginals)
from .linalg import (VariableSet, build_basis_matrix, build_event_matrix,
                     event_rank, null_space_basis, variable_selector)
from .separability import (SeparabilityVerdict, SeparableFactorization,
                           approximate_separable, compose, factorize, project,
                           repair_negative_columns, solve_coefficients,
                           sufficiency_oracle, test_separable)

__version__ = "0.1.0"
