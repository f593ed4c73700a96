"""Time-scale calculus and a fixed-point solver for nonlocal p-Laplacian problems."""

__version__ = "0.1.0"

from .analysis import (
    ConeReport,
    ExistenceReport,
    LimitReport,
    classify_limits,
    cone_check,
    existence_check,
    lambda_star_search,
    rho_cone,
)
from .errors import DivergenceError, DomainError, HypothesisViolation, InvalidProblem, SchemaError
from .operator import OperatorState, apply_G, boundary_residuals, build_state, equation_residual
from .problem import NTC, Constant, Power, ProblemSpec, Tabulated, eval_f, f_extrema, phi_p, phi_q
from .solver import SolveReport, SolverConfig, solve
from .timescale import (
    GridFunction,
    Interval,
    Point,
    TimeScale,
    delta_derivative,
    delta_integral,
    max_norm,
    nabla_derivative,
    nabla_integral,
    rho,
    sigma,
)
