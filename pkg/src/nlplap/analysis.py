"""Cone diagnostics, existence constants and limit classification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .operator import apply_G
from .problem import ProblemSpec, f_extrema, phi
from .timescale import Grid, GridFunction, max_norm

DEFAULT_SEED = 42
LAMBDA_CAP = 1.0 - 1e-9

# limit classification: decades probed and the two decision thresholds
LIMIT_DECADES = 12
LIMIT_HIGH = 1e6
LIMIT_LOW = 1e-6


def rho_cone(beta: float, eta: float, T: float) -> float:
    """Guaranteed ratio min u / max u for solutions: beta (T - eta) / (T - beta eta)."""
    return beta * (T - eta) / (T - beta * eta)


# cone membership -------------------------------------------------------------


@dataclass
class ConeReport:
    nonneg: bool
    concave: bool
    harnack: bool
    rho_cone: float
    min_value: float
    # largest increase between consecutive Δ-slopes (<= 0 for concave data)
    concave_violation: float
    # min u - rho_cone * max u
    harnack_margin: float

    @property
    def in_cone(self) -> bool:
        return self.nonneg and self.concave and self.harnack

    def to_dict(self) -> dict:
        return asdict(self)


def cell_slopes(u: GridFunction) -> np.ndarray:
    """Δ-quotients (u(t_{i+1}) - u(t_i)) / (t_{i+1} - t_i) on every cell."""
    return np.diff(u.values) / np.diff(u.grid.points)


def cone_check(spec: ProblemSpec, u: GridFunction, tol: float) -> ConeReport:
    rc = rho_cone(spec.beta, spec.eta, spec.T)
    v = u.values
    d = cell_slopes(u)
    worst = float(np.max(np.diff(d))) if len(d) > 1 else 0.0
    margin = float(v.min() - rc * v.max())
    return ConeReport(
        nonneg=bool(v.min() >= -tol),
        concave=bool(worst <= tol),
        harnack=bool(margin >= -tol),
        rho_cone=rc,
        min_value=float(v.min()),
        concave_violation=worst,
        harnack_margin=margin,
    )


def sample_cone(grid: Grid, r: float, rho: float, rng: np.random.Generator, monotone=True):
    """Random concave grid function with max value ``r`` and min >= rho * r.

    Slopes are a random nonincreasing sequence (sorted, with occasional flat
    runs), so the piecewise-linear interpolant is concave.  With
    ``monotone=False`` the slopes may start positive.
    """
    dt = np.diff(grid.points)
    n = len(dt)
    kinks = rng.exponential(size=n) * (rng.random(n) < rng.uniform(0.02, 1.0))
    s = np.cumsum(kinks)
    c = rng.uniform(0.0, s[-1]) if (not monotone and s[-1] > 0) else 0.0
    d = c - s
    v = np.concatenate([[0.0], np.cumsum(d * dt)])
    spread = v.max() - v.min()
    theta = rng.uniform(rho, 1.0)
    if spread <= 0:
        return GridFunction(grid, np.full(len(grid), r))
    return GridFunction(grid, r - (v.max() - v) * (r * (1.0 - theta) / spread))


def boundary_norms(spec: ProblemSpec, r: float, n: int = 200, seed: int = DEFAULT_SEED) -> np.ndarray:
    """‖Gu‖ for ``n`` seeded samples u of the cone boundary {u in K : ‖u‖ = r}."""
    rng = np.random.default_rng(seed)
    rc = rho_cone(spec.beta, spec.eta, spec.T)
    return np.array(
        [max_norm(apply_G(spec, sample_cone(spec.grid, r, rc, rng))) for _ in range(n)]
    )


# existence constants ---------------------------------------------------------


@dataclass
class ExistenceReport:
    a: float
    b: float
    lam: float
    f_min_a: float
    f_max_a: float
    f_min_b: float
    f_max_b: float
    A1: float | None
    B1: float
    # H2: max f on [0, a] <= phi_p(a A1);  H3: min f on [0, b] >= phi_p(b B1)
    H2_lhs: float
    H2_rhs: float | None
    H2_holds: bool | None
    H3_lhs: float
    H3_rhs: float
    H3_holds: bool
    # proof inequality chains: upper bound over ‖u‖ = a, lower bound over ‖u‖ = b
    chain_a: float | None
    chain_b: float
    H2_chain_holds: bool | None
    H3_chain_holds: bool
    lambda_star: float | None
    # bound on ‖Gu‖ for 0 <= u <= a using the actual max of f instead of phi_p(a A1)
    norm_bound_a: float | None
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _offset(spec: ProblemSpec) -> float:
    """T + beta eta / (1 - beta), the bound on s - A / (lam sup h) over [0, T]."""
    return spec.T + spec.beta * spec.eta / (1.0 - spec.beta)


def A1_constant(spec: ProblemSpec, a: float) -> float | None:
    f_min, _ = f_extrema(spec, a)
    if not f_min > 0:
        return None
    T, b = spec.T, spec.beta
    return (1 - b) / (T * (2 - b)) * spec.phi_p(_offset(spec) / (T * f_min) ** spec.k)


def B1_constant(spec: ProblemSpec, b: float) -> float:
    _, f_max = f_extrema(spec, b)
    T, be, eta = spec.T, spec.beta, spec.eta
    return (1 - be) / (be * (T - eta)) * spec.phi_p(eta) * spec.phi_p(spec.lam / (T * f_max) ** spec.k)


def chain_a(spec: ProblemSpec, a: float, lam=None):
    """Upper estimate of ‖Gu‖ over ‖u‖ = a from the compression step of the proof.

    Vectorised in ``lam`` (defaults to the problem's value); None when A1 is
    undefined.
    """
    A1 = A1_constant(spec, a)
    if A1 is None:
        return None
    f_min, _ = f_extrema(spec, a)
    lam = spec.lam if lam is None else lam
    T, be = spec.T, spec.beta
    x = _offset(spec) / (T * f_min) ** spec.k
    return spec.phi_q(lam) * a * A1 * T * ((2 - be) / (1 - be)) * spec.phi_q(x)


def chain_b(spec: ProblemSpec, b: float) -> float:
    """Lower estimate of ‖Gu‖ over ‖u‖ = b from the expansion step of the proof."""
    _, f_max = f_extrema(spec, b)
    T, be, eta = spec.T, spec.beta, spec.eta
    return (
        b
        * B1_constant(spec, b)
        * (be / (1 - be))
        * spec.phi_q(spec.lam / (T * f_max) ** spec.k)
        * spec.phi_q(eta)
        * (T - eta)
    )


def lambda_star_search(spec: ProblemSpec, a: float, rtol: float = 1e-9):
    """Largest lam in (0, 1) whose compression chain stays <= a, by bisection.

    Returns ``LAMBDA_CAP`` when the chain already holds at the cap and None
    when A1 is undefined or the chain fails for every positive lam.
    """
    if chain_a(spec, a, 1.0) is None:
        return None
    F = lambda lam: float(chain_a(spec, a, lam))
    if F(LAMBDA_CAP) <= a:
        return LAMBDA_CAP
    if not F(1e-300) <= a:
        return None
    lo, hi = 0.0, LAMBDA_CAP
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if F(mid) <= a:
            lo = mid
        else:
            hi = mid
        if abs(F(lo) - a) <= rtol * a or hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return lo


def existence_check(spec: ProblemSpec, a: float, b: float) -> ExistenceReport:
    if not (a > 0 and b > 0):
        raise ValueError("existence_check needs a > 0 and b > 0")
    f_min_a, f_max_a = f_extrema(spec, a)
    f_min_b, f_max_b = f_extrema(spec, b)
    A1 = A1_constant(spec, a)
    B1 = B1_constant(spec, b)
    notes = []
    degenerate = A1 is None
    if degenerate:
        notes.append("inf f on [0, a] is 0: A1 and the compression bounds are undefined")
        H2_rhs = H2_holds = ca = H2c = bound = None
    else:
        H2_rhs = spec.phi_p(a * A1)
        H2_holds = bool(f_max_a <= H2_rhs)
        ca = float(chain_a(spec, a))
        H2c = bool(ca <= a)
        x = _offset(spec) / (spec.T * f_min_a) ** spec.k
        be = spec.beta
        bound = float(
            spec.phi_q(f_max_a) * spec.T * (2 - be) / (1 - be) * spec.phi_q(spec.lam) * spec.phi_q(x)
        )
    H3_rhs = spec.phi_p(b * B1)
    cb = float(chain_b(spec, b))
    if b < a:
        notes.append("b < a: both orderings of the norm levels are admissible")
    return ExistenceReport(
        a=a,
        b=b,
        lam=spec.lam,
        f_min_a=f_min_a,
        f_max_a=f_max_a,
        f_min_b=f_min_b,
        f_max_b=f_max_b,
        A1=A1,
        B1=B1,
        H2_lhs=f_max_a,
        H2_rhs=H2_rhs,
        H2_holds=H2_holds,
        H3_lhs=f_min_b,
        H3_rhs=H3_rhs,
        H3_holds=bool(f_min_b >= H3_rhs),
        chain_a=ca,
        chain_b=cb,
        H2_chain_holds=H2c,
        H3_chain_holds=bool(cb >= b),
        lambda_star=lambda_star_search(spec, a),
        norm_bound_a=bound,
        degenerate=degenerate,
        notes=notes,
    )


# limits at 0 and infinity ----------------------------------------------------


@dataclass
class LimitReport:
    f0: str
    finf: str
    corollary_applies: bool
    ratios_at_zero: list
    ratios_at_infinity: list

    def to_dict(self) -> dict:
        return asdict(self)


def _trend(r: np.ndarray) -> str:
    last = r[-1]
    with np.errstate(invalid="ignore"):
        steps = np.diff(r)
    if last > LIMIT_HIGH:
        return "infinite" if np.all(steps >= 0) else "inconclusive"
    if last < LIMIT_LOW:
        return "zero" if np.all(steps <= 0) else "inconclusive"
    return "finite"


def classify_limits(spec: ProblemSpec) -> LimitReport:
    """Numerical limits of f(u) / phi_p(u) as u -> 0+ and u -> infinity."""
    j = np.arange(1, LIMIT_DECADES + 1, dtype=float)
    small, large = 10.0**-j, 10.0**j
    with np.errstate(divide="ignore", over="ignore"):
        r0 = np.asarray(spec.f(small), float) / phi(small, spec.p)
        rinf = np.asarray(spec.f(large), float) / phi(large, spec.p)
    f0, finf = _trend(r0), _trend(rinf)
    applies = (f0, finf) in {("zero", "infinite"), ("infinite", "zero")}
    return LimitReport(f0, finf, applies, r0.tolist(), rinf.tolist())
