"""Exception hierarchy shared by all wavesplit modules."""


class WavesplitError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(WavesplitError, ValueError):
    """Array shapes are inconsistent with each other."""


class SymmetryError(WavesplitError, ValueError):
    """A mirror-symmetric pattern was required but not supplied."""


class SpectrumError(WavesplitError, ArithmeticError):
    """The spectrum is degenerate or the eigensolver failed."""


class BudgetExceeded(WavesplitError, MemoryError):
    """A Hilbert-space dimension exceeds the configured memory budget."""

    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"{what} has dimension {size}, budget is {budget}")
        self.size = size
        self.budget = budget


class SolverError(WavesplitError, ArithmeticError):
    """Newton iteration could not proceed.

    Carries the iterate at which the failure happened so callers can inspect
    or restart from it.
    """

    def __init__(self, message: str, pattern, iteration: int, residual: float):
        super().__init__(f"{message} (iteration {iteration}, residual {residual:.3e})")
        self.pattern = pattern
        self.iteration = iteration
        self.residual = residual


class SingularJacobianError(SolverError):
    pass


class LineSearchError(SolverError):
    pass
