"""Exception hierarchy shared by every module."""


class AnisolabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AnisolabError, ValueError):
    pass


class InvalidParamsError(InvalidInputError):
    """(N, p, gamma) outside 1 < p < N, 0 <= gamma < C_H."""


class DomainError(InvalidInputError):
    """Evaluation at a point where the quantity is undefined (e.g. grad H at 0)."""


class DegenerateFitError(InvalidInputError):
    pass


class DualEvaluationError(AnisolabError):
    """Numerical dual norm did not converge.

    ``lower_bound`` holds the best value of <xi, x> found on the unit H-ball,
    which is always a valid lower bound for H°(x).
    """

    def __init__(self, message, lower_bound):
        super().__init__(message)
        self.lower_bound = lower_bound


class ConsistencyError(AnisolabError):
    """A computed quantity contradicts a structural fact it must satisfy."""


class SolverError(AnisolabError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])
