"""Exception hierarchy shared by every module of the package."""


class ContensError(Exception):
    """Base class for all errors raised by :mod:`contens`."""


class InputError(ContensError, ValueError):
    """Invalid user input (maps to CLI exit code 2)."""


class DimensionMismatch(InputError):
    pass


class NotHermitian(InputError):
    pass


class NotDensityMatrix(InputError):
    pass


class NotBipartite(InputError):
    pass


class NotSingleSystem(InputError):
    pass


class NotFullRange(InputError):
    pass


class ParseError(InputError):
    pass


class SchemaViolation(InputError):
    pass


class UnsupportedFamily(InputError):
    pass


class ToleranceBelowNoise(InputError):
    pass


class BoundViolation(InputError):
    """A smeared ensemble with this ``L`` would have negative weights.

    ``min_L`` is the smallest admissible value of the parameter and
    ``alt_min_L`` the smallest value satisfying ``L > 1/(p0 (n+1))``.
    """

    def __init__(self, message: str, min_L: int, alt_min_L: int, p0: float):
        super().__init__(message)
        self.min_L = min_L
        self.alt_min_L = alt_min_L
        self.p0 = p0


class BudgetExceeded(ContensError):
    """Sample budget exhausted (maps to CLI exit code 3)."""


class ConvergenceFailure(ContensError, ArithmeticError):
    pass


class MaxIterations(ContensError):
    pass


class MomentOverflow(ContensError, OverflowError):
    pass
