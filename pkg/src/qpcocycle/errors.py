"""Exception hierarchy shared by every module."""


class QPCocycleError(Exception):
    """Base class for all library errors."""


class InputError(QPCocycleError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class InfeasibleInput(InputError):
    """Inputs lie outside the hypotheses under which the construction exists."""


class PrecisionError(QPCocycleError):
    """Fixed-point precision is insufficient for the requested computation."""

    def __init__(self, message, required_bits=None):
        super().__init__(message)
        self.required_bits = required_bits


class NumericError(QPCocycleError, ArithmeticError):
    """A non-finite value appeared during a floating point computation."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InvariantError(QPCocycleError, AssertionError):
    """An internal invariant (e.g. conjugate symmetry) was broken."""


class WindowError(QPCocycleError):
    """No scale window admits the requested N."""

    def __init__(self, message, admissible=()):
        super().__init__(message)
        self.admissible = tuple(admissible)


class SearchError(QPCocycleError):
    """An iterative search exhausted its budget."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BudgetError(QPCocycleError):
    """A computation would exceed the configured cost budget."""

    def __init__(self, message, largest_feasible=None):
        super().__init__(message)
        self.largest_feasible = largest_feasible
