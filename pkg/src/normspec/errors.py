"""Exception hierarchy shared by every module."""


class NormSpecError(Exception):
    """Base class for all library errors."""


class DimensionError(NormSpecError, ValueError):
    pass


class PreconditionError(NormSpecError, ValueError):
    pass


class ConvergenceError(NormSpecError, ArithmeticError):
    pass


class NotNormalError(PreconditionError):
    """Raised when a matrix fails the normality check.

    The offending residual ``||TT* - T*T||_F`` is kept on ``residual``.
    """

    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


class ModelMismatchError(NormSpecError, ValueError):
    pass


class DuplicateEigenvalueError(NormSpecError, ValueError):
    pass


class CapacityError(NormSpecError, ValueError):
    pass


class PartitionError(NormSpecError, ValueError):
    pass


class PositivityError(NormSpecError, ValueError):
    pass


class SizeError(NormSpecError, ValueError):
    pass


class BudgetError(NormSpecError, ValueError):
    """A requested resolution exceeds the enumeration budget.

    ``achievable`` carries the best value reachable inside the budget, when known.
    """

    def __init__(self, msg, achievable=None):
        super().__init__(msg)
        self.achievable = achievable


class InconsistentTypeError(NormSpecError, ValueError):
    pass


class ArityError(NormSpecError, ValueError):
    pass


class SeparationError(NormSpecError, ValueError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class NoAlignmentError(NormSpecError, ValueError):
    def __init__(self, msg, bound=None):
        super().__init__(msg)
        self.bound = bound


class DivergenceError(NormSpecError, ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class RealizationError(NormSpecError, ValueError):
    pass


class ParameterMismatchError(NormSpecError, ValueError):
    pass


class RouteMismatchError(NormSpecError, ArithmeticError):
    """Two independent computations of the same object disagree."""
