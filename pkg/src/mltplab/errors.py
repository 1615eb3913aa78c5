"""Exception types shared across the package."""


class DimensionError(ValueError):
    pass


class AssociativityError(ValueError):
    """Raised when a tensor (or table) fails the associativity check.

    ``witness`` holds the worst-violating index tuple (0-based).
    """

    def __init__(self, message, witness=None, defect=None):
        super().__init__(message)
        self.witness = witness
        self.defect = defect


class HypothesisError(ValueError):
    """A perturbation theorem was called outside its hypotheses."""


class ConvergenceError(RuntimeError):
    pass


class HomomorphismError(ValueError):
    pass
