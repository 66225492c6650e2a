"""Numerical toolkit for anisotropic p-Laplacian problems with a critical Hardy potential."""

from .errors import (AnisolabError, ConsistencyError, DegenerateFitError, DomainError,
                     DualEvaluationError, InvalidInputError, InvalidParamsError, SolverError)
from .gauge import Gauge, GaugeSpec
from .radial import RadialProfile
from .spectrum import ProblemParams, solve_exponents, supersolution_params

__all__ = [
    "AnisolabError", "ConsistencyError", "DegenerateFitError", "DomainError",
    "DualEvaluationError", "InvalidInputError", "InvalidParamsError", "SolverError",
    "Gauge", "GaugeSpec", "ProblemParams", "RadialProfile", "solve_exponents",
    "supersolution_params",
]

__version__ = "0.1.0"
