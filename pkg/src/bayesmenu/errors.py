"""Exception types shared by the solvers and the command line."""


class DimensionError(ValueError):
    """The instance has the wrong number of outcomes or types for a solver."""


class PreconditionError(ValueError):
    """An input menu does not satisfy the property a routine requires."""


class CapExceededError(RuntimeError):
    """An enumeration would exceed its size cap; ``count`` is the required size."""

    def __init__(self, what: str, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: enumeration size {count} exceeds the cap {cap}")


class SolverError(RuntimeError):
    """A solver failed to produce an answer."""


class IterationCapError(SolverError):
    """Column generation hit its iteration cap before closing the gap."""

    def __init__(self, message: str, menu=None, value=None, gap=None):
        self.menu = menu
        self.value = value
        self.gap = gap
        super().__init__(message)
