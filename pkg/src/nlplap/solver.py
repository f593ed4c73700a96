"""Damped Picard iteration for fixed points of G."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .analysis import DEFAULT_SEED, ConeReport, cone_check
from .errors import DivergenceError, InvalidProblem
from .operator import apply_G, boundary_residuals, equation_residual
from .problem import ProblemSpec
from .timescale import GridFunction, max_norm

log = logging.getLogger(__name__)

DIVERGENCE_NORM = 1e12


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 500
    relax: float = 0.5
    init: float = 1.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidProblem("tol must be > 0", "/solver/tol")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            raise InvalidProblem("max_iter must be a positive integer", "/solver/max_iter")
        if not 0 < self.relax <= 1:
            raise InvalidProblem("relax must satisfy 0 < relax <= 1", "/solver/relax")
        if not self.init >= 0:
            raise InvalidProblem("init must be >= 0", "/solver/init")


@dataclass
class SolveReport:
    solution: GridFunction
    converged: bool
    iterations: int
    history: list
    residual_sup: float
    boundary: tuple
    cone: ConeReport
    clamped: int = 0
    # None when no (a, b) bracket was supplied
    outside_bracket: bool | None = None
    notes: list = field(default_factory=list)


def solve(spec: ProblemSpec, cfg: SolverConfig = SolverConfig(), bracket=None) -> SolveReport:
    """Iterate u <- (1 - relax) u + relax G(u) from the constant ``cfg.init``.

    Stops when the sup-norm step is <= ``cfg.tol``; reaching ``max_iter``
    is reported through ``converged=False``.  Iterates are floored at 0
    before G is applied and the number of clamped entries is recorded.
    ``bracket=(a, b)`` flags a limit whose norm falls outside [a, b].
    """
    grid = spec.grid
    u = np.full(len(grid), float(cfg.init))
    history = []
    clamped = 0
    converged = False
    w = cfg.relax
    n = 0
    for n in range(1, cfg.max_iter + 1):
        neg = u < 0
        if neg.any():
            clamped += int(neg.sum())
            u = np.where(neg, 0.0, u)
        gu = apply_G(spec, GridFunction(grid, u)).values
        new = (1.0 - w) * u + w * gu
        if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > DIVERGENCE_NORM:
            raise DivergenceError("iterates overflowed or became NaN", n)
        step = float(np.max(np.abs(new - u)))
        history.append(step)
        u = new
        if step <= cfg.tol:
            converged = True
            break
    log.debug("picard: %d iterations, last step %.3e", n, history[-1])
    sol = GridFunction(grid, u)
    report = SolveReport(
        solution=sol,
        converged=converged,
        iterations=n,
        history=history,
        residual_sup=float(np.max(np.abs(equation_residual(spec, sol).values))),
        boundary=boundary_residuals(spec, sol),
        cone=cone_check(spec, sol, tol=10 * spec.timescale.h_max),
        clamped=clamped,
    )
    if bracket is not None:
        lo, hi = sorted(bracket)
        norm = max_norm(sol)
        report.outside_bracket = not (lo <= norm <= hi)
        if report.outside_bracket:
            report.notes.append(f"‖u‖ = {norm:.6g} lies outside [{lo:g}, {hi:g}]")
    return report
