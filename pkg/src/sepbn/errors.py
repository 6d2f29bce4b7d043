"""Exception types raised by sepbn."""


class SepbnError(Exception):
    """Base class for library errors."""


class SizeLimitError(SepbnError):
    """Joint outcome space is larger than the configured dense limit."""

    def __init__(self, size, limit):
        super().__init__(
            f"joint outcome count {size} exceeds the size limit {limit}")
        self.size = size
        self.limit = limit


class NotSeparableError(SepbnError):
    """The table does not lie in the column space of the event matrix."""

    def __init__(self, residual, tol):
        super().__init__(
            f"table is not separable: projection residual {residual:.6g} "
            f"exceeds tolerance {tol:.3g}")
        self.residual = residual
        self.tol = tol


class RepairInfeasibleError(SepbnError):
    """Negative-column repair ran out of budget.

    Only happens when ``B @ F`` had negative entries, i.e. ``F`` did not come
    from a nonnegative table.
    """

    def __init__(self, column, shortfall):
        super().__init__(
            f"cannot remove negative entries from column {column}: "
            f"shortfall {shortfall:.6g}")
        self.column = column
        self.shortfall = shortfall


class ConsistencyError(SepbnError):
    """An internal numerical check failed."""
