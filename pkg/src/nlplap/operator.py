"""The fixed-point operator G and residuals of the boundary value problem.

For a state u the operator builds

    D    = (∫_0^T f(u) ∇τ)^k
    h    = f(u) / D
    A    = -(lam beta / (1 - beta)) ∫_0^eta h ∇r
    g(s) = lam ∫_0^s h ∇r - A
    B    = (∫_0^T phi_q(g) Δs - beta ∫_0^eta phi_q(g) Δs) / (1 - beta)

and returns Gu(t) = B - ∫_0^t phi_q(g) Δs.  The forcing parameter enters once,
through g and A; h carries no factor of lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation
from .problem import ProblemSpec, eval_f
from .timescale import (
    GridFunction,
    delta_antiderivative,
    delta_gradient,
    nabla_antiderivative,
    nabla_integral,
)


@dataclass(frozen=True, eq=False)
class OperatorState:
    denom: float
    h: GridFunction
    A: float
    g: GridFunction
    B: float
    # t ↦ ∫_0^t phi_q(g) Δs, kept so that G needs no second pass
    phi_q_g_integral: GridFunction


def build_state(spec: ProblemSpec, u: GridFunction) -> OperatorState:
    fu = GridFunction(u.grid, eval_f(spec, u.values))
    total = nabla_integral(fu, 0.0, spec.T)
    if not total > 0:
        raise HypothesisViolation(f"∫ f(u) ∇τ = {total:g} must be positive")
    denom = total**spec.k
    if not (denom > 0 and np.isfinite(denom)):
        raise HypothesisViolation(f"nonlocal denominator {denom:g} is not a positive finite number")
    h = GridFunction(u.grid, fu.values / denom)
    H = nabla_antiderivative(h).values
    ie = spec.eta_index
    beta, lam = spec.beta, spec.lam
    A = -lam * beta / (1.0 - beta) * H[ie]
    g = GridFunction(u.grid, lam * H - A)
    I = delta_antiderivative(GridFunction(u.grid, spec.phi_q(g.values)))
    B = (I.values[-1] - beta * I.values[ie]) / (1.0 - beta)
    return OperatorState(denom=denom, h=h, A=A, g=g, B=B, phi_q_g_integral=I)


def apply_G(spec: ProblemSpec, u: GridFunction) -> GridFunction:
    st = build_state(spec, u)
    return GridFunction(u.grid, st.B - st.phi_q_g_integral.values)


def boundary_residuals(spec: ProblemSpec, u: GridFunction) -> tuple:
    """(r1, r2) for the two boundary conditions.

    r1 = phi_p(u^Δ(0)) - beta phi_p(u^Δ(eta)),  r2 = u(T) - beta u(eta).
    """
    ie = spec.grid.index_of(spec.eta)
    du = delta_gradient(u)
    r1 = spec.phi_p(du[0]) - spec.beta * spec.phi_p(du[ie])
    r2 = u.values[-1] - spec.beta * u.values[ie]
    return float(r1), float(r2)


def equation_residual(spec: ProblemSpec, u: GridFunction) -> GridFunction:
    """R(t) = -(phi_p(u^Δ))^∇(t) - lam f(u(t)) / D at interior grid points.

    u^Δ is the cell quotient (u(t_{i+1}) - u(t_i)) / (t_{i+1} - t_i), exact at
    right-scattered points and a midpoint value on dense cells; the ∇-quotient
    of phi_p(u^Δ) divides by the distance between those locations.  On dense
    stretches this is the usual conservative second difference.  The two end
    points are outside (0, T) and carry 0.
    """
    grid = u.grid
    t = grid.points
    fu = GridFunction(grid, eval_f(spec, u.values))
    denom = nabla_integral(fu, 0.0, spec.T) ** spec.k
    w = spec.phi_p(np.diff(u.values) / np.diff(t))
    loc = np.where(grid.mu[:-1] > 0, t[:-1], 0.5 * (t[:-1] + t[1:]))
    res = np.zeros(len(grid))
    res[1:-1] = -np.diff(w) / np.diff(loc) - spec.lam * fu.values[1:-1] / denom
    return GridFunction(grid, res)
