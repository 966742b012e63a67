"""Exception types shared across the package."""


class SignVineError(Exception):
    """Base class for package-specific failures."""


class NonIncreasingCopula(SignVineError):
    """A rectangle probability came out negative beyond tolerance.

    Signals that the copula assigned to a conditional pair is not a valid
    (constant) conditional copula for the evaluated cell.
    """


class DegenerateConditional(SignVineError):
    """A conditional probability became non-finite during a vine recursion."""


class NoConvergence(SignVineError):
    """Optimizer hit its iteration cap.  Carries the best point found so far."""

    def __init__(self, message, best_parameter=None, best_value=None):
        super().__init__(message)
        self.best_parameter = best_parameter
        self.best_value = best_value


class SingularDesign(SignVineError):
    """The regressor cross-product matrix is singular."""


class StudyFailure(SignVineError):
    """Too many Monte Carlo replications failed (over the 1% budget)."""
