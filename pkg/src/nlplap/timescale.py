"""Bounded time scales, their sampling grids and Δ/∇ calculus.

A time scale is stored as a finite, strictly increasing list of components,
each a closed interval or an isolated point.  Jump operators are exact and
come from the structure; derivatives and integrals act on values sampled at
the grid points.  Scattered parts are handled exactly, dense parts by finite
differences and the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError, InvalidProblem

#: absolute tolerance for membership and grid lookups
ATOL = 1e-12


class InvalidTimeScale(InvalidProblem):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def contains(self, t: float) -> bool:
        return self.lo - ATOL <= t <= self.hi + ATOL

    def to_dict(self) -> dict:
        return {"interval": [self.lo, self.hi]}


@dataclass(frozen=True)
class Point:
    t: float

    @property
    def lo(self) -> float:
        return self.t

    @property
    def hi(self) -> float:
        return self.t

    def contains(self, t: float) -> bool:
        return abs(t - self.t) <= ATOL

    def to_dict(self) -> dict:
        return {"point": self.t}


Component = Union[Interval, Point]


@dataclass(frozen=True)
class Grid:
    """Sample points of a time scale together with their jump data.

    ``mu`` and ``nu`` are the forward and backward graininess.  They are zero
    at points interior to an interval even though neighbouring samples are a
    step apart, and zero at the two ends by the ``sigma(max) = max``,
    ``rho(min) = min`` convention.  ``component`` maps each point to the index
    of the component it belongs to.
    """

    points: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    component: np.ndarray
    timescale: "TimeScale" = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def right_scattered(self) -> np.ndarray:
        return self.mu > 0

    @property
    def left_scattered(self) -> np.ndarray:
        return self.nu > 0

    @property
    def right_dense(self) -> np.ndarray:
        return ~self.right_scattered

    @property
    def left_dense(self) -> np.ndarray:
        return ~self.left_scattered

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to ``t``; DomainError if there is none."""
        i = int(np.searchsorted(self.points, t))
        for j in (i - 1, i):
            if 0 <= j < len(self.points) and abs(self.points[j] - t) <= ATOL:
                return j
        raise DomainError(f"t={t!r} is not a grid point")

    def has_point(self, t: float) -> bool:
        try:
            self.index_of(t)
        except DomainError:
            return False
        return True

    @cached_property
    def delta_weights(self) -> np.ndarray:
        """Per-cell Δ-integration weights, shape (N-1, 2) on (left, right) values."""
        return _cell_weights(self.points, self.mu[:-1] > 0, left=True)

    @cached_property
    def nabla_weights(self) -> np.ndarray:
        return _cell_weights(self.points, self.nu[1:] > 0, left=False)

    @cached_property
    def _delta_stencil(self):
        return _stencils(self, forward=True)

    @cached_property
    def _nabla_stencil(self):
        return _stencils(self, forward=False)


def _cell_weights(t, scattered, left):
    dt = np.diff(t)
    w = np.empty((len(dt), 2))
    w[:, 0] = w[:, 1] = 0.5 * dt
    if left:
        w[scattered, 0] = dt[scattered]
        w[scattered, 1] = 0.0
    else:
        w[scattered, 0] = 0.0
        w[scattered, 1] = dt[scattered]
    return w


def _d1_weights(x0, xs):
    """Weights of the derivative at ``x0`` of the interpolant through ``xs``."""
    xs = list(xs)
    out = []
    for j, xj in enumerate(xs):
        others = [x for m, x in enumerate(xs) if m != j]
        denom = math.prod(xj - x for x in others)
        num = 0.0
        for m in range(len(others)):
            num += math.prod(x0 - x for l, x in enumerate(others) if l != m)
        out.append(num / denom)
    return out


def _stencils(grid: Grid, forward: bool):
    """Index and weight arrays (n, 3) for the second-order Δ or ∇ gradient.

    Scattered directions use the exact jump quotient.  Dense points use a
    three-point stencil restricted to their own interval component (two
    points if the component has only one cell there).  Rows that are not in
    the domain of the derivative carry NaN weights.
    """
    t = grid.points
    comp = grid.component
    n = len(t)
    idx = np.zeros((n, 3), dtype=int)
    wts = np.full((n, 3), np.nan)
    jump = grid.mu if forward else grid.nu
    step = 1 if forward else -1
    for i in range(n):
        j = i + step
        if jump[i] > 0:
            idx[i] = (i, j, j)
            wts[i] = (-1.0 / jump[i] * step, 1.0 / jump[i] * step, 0.0)
            continue
        same = [m for m in (i - 2, i - 1, i + 1, i + 2) if 0 <= m < n and comp[m] == comp[i]]
        if not same:
            continue  # scattered end point: outside the derivative's domain
        prev_ok, next_ok = (i - 1) in same, (i + 1) in same
        if prev_ok and next_ok:
            nodes = (i - 1, i, i + 1)
        elif next_ok:
            nodes = (i, i + 1, i + 2) if (i + 2) in same else (i, i + 1)
        else:
            nodes = (i - 2, i - 1, i) if (i - 2) in same else (i - 1, i)
        w = _d1_weights(t[i], [t[m] for m in nodes])
        if len(nodes) == 2:
            nodes, w = nodes + (nodes[1],), w + [0.0]
        idx[i] = nodes
        wts[i] = w
    return idx, wts


def _parse_components(raw) -> list:
    comps = []
    for i, c in enumerate(raw):
        where = f"/components/{i}"
        if isinstance(c, (Interval, Point)):
            comps.append(c)
        elif isinstance(c, dict) and "interval" in c:
            iv = c["interval"]
            if not (isinstance(iv, (list, tuple)) and len(iv) == 2):
                raise InvalidTimeScale("interval must be a pair [lo, hi]", where)
            comps.append(Interval(float(iv[0]), float(iv[1])))
        elif isinstance(c, dict) and "point" in c:
            comps.append(Point(float(c["point"])))
        else:
            raise InvalidTimeScale("component must be {'interval': [lo, hi]} or {'point': t}", where)
    return comps


class TimeScale:
    """A bounded time scale given as intervals and isolated points.

    ``knots`` are extra times inside interval components that must become grid
    points (e.g. an interior boundary-condition location).
    """

    def __init__(self, components: Sequence, h_max: float = 1e-3, knots: Sequence[float] = ()):
        comps = _parse_components(components)
        if not comps:
            raise InvalidTimeScale("time scale needs at least one component", "/components")
        if not (h_max > 0 and math.isfinite(h_max)):
            raise InvalidTimeScale("h_max must be a positive finite number", "/h_max")
        for i, c in enumerate(comps):
            if not all(math.isfinite(x) for x in (c.lo, c.hi)):
                raise InvalidTimeScale("component bounds must be finite", f"/components/{i}")
            if isinstance(c, Interval) and not c.lo < c.hi:
                raise InvalidTimeScale("interval needs lo < hi", f"/components/{i}")
            if i and not comps[i - 1].hi < c.lo:
                raise InvalidTimeScale(
                    "components must be sorted and pairwise disjoint", f"/components/{i}"
                )
        if len(comps) == 1 and isinstance(comps[0], Point):
            raise InvalidTimeScale("time scale needs at least two points", "/components")
        self.components = tuple(comps)
        self.h_max = float(h_max)
        self.knots = tuple(sorted(float(k) for k in knots))
        for k in self.knots:
            if not self.contains(k):
                raise DomainError(f"knot {k!r} is not in the time scale")

    # construction helpers -------------------------------------------------

    @classmethod
    def interval(cls, lo: float, hi: float, h_max: float = 1e-3, knots=()) -> "TimeScale":
        return cls([Interval(lo, hi)], h_max, knots)

    @classmethod
    def integers(cls, lo: int, hi: int) -> "TimeScale":
        return cls([Point(float(n)) for n in range(lo, hi + 1)])

    @classmethod
    def from_dict(cls, d: dict, knots=()) -> "TimeScale":
        if not isinstance(d, dict) or "components" not in d:
            raise InvalidTimeScale("time scale needs a 'components' list", "")
        if not isinstance(d["components"], list):
            raise InvalidTimeScale("'components' must be a list", "/components")
        return cls(d["components"], float(d.get("h_max", 1e-3)), knots)

    def to_dict(self) -> dict:
        return {"components": [c.to_dict() for c in self.components], "h_max": self.h_max}

    def __repr__(self):
        parts = " ∪ ".join(
            f"[{c.lo:g},{c.hi:g}]" if isinstance(c, Interval) else f"{{{c.t:g}}}"
            for c in self.components
        )
        return f"TimeScale({parts}, h_max={self.h_max:g})"

    # structure ------------------------------------------------------------

    @property
    def t_min(self) -> float:
        return self.components[0].lo

    @property
    def t_max(self) -> float:
        return self.components[-1].hi

    def _locate(self, t: float) -> int:
        for i, c in enumerate(self.components):
            if c.contains(t):
                return i
        raise DomainError(f"t={t!r} is not in {self!r}")

    def contains(self, t: float) -> bool:
        try:
            self._locate(t)
        except DomainError:
            return False
        return True

    def sigma(self, t: float) -> float:
        i = self._locate(t)
        c = self.components[i]
        if isinstance(c, Interval) and t < c.hi - ATOL:
            return float(t)
        if i + 1 == len(self.components):
            return float(t)
        return self.components[i + 1].lo

    def rho(self, t: float) -> float:
        i = self._locate(t)
        c = self.components[i]
        if isinstance(c, Interval) and t > c.lo + ATOL:
            return float(t)
        if i == 0:
            return float(t)
        return self.components[i - 1].hi

    def mu(self, t: float) -> float:
        return self.sigma(t) - t

    def nu(self, t: float) -> float:
        return t - self.rho(t)

    # numerics -------------------------------------------------------------

    @cached_property
    def grid(self) -> Grid:
        pts, comp = [], []
        for ci, c in enumerate(self.components):
            if isinstance(c, Point):
                seg = np.array([c.t])
            else:
                cuts = [c.lo] + [k for k in self.knots if c.lo < k < c.hi] + [c.hi]
                pieces = []
                for lo, hi in zip(cuts[:-1], cuts[1:]):
                    n = max(1, math.ceil((hi - lo) / self.h_max - 1e-9))
                    piece = lo + (hi - lo) * np.arange(n + 1) / n
                    piece[-1] = hi
                    pieces.append(piece[:-1])
                seg = np.concatenate(pieces + [np.array([c.hi])])
            pts.append(seg)
            comp.append(np.full(len(seg), ci))
        points = np.concatenate(pts)
        comp = np.concatenate(comp)
        gaps = np.diff(points)
        jump = comp[1:] != comp[:-1]
        mu = np.zeros(len(points))
        nu = np.zeros(len(points))
        mu[:-1][jump] = gaps[jump]
        nu[1:][jump] = gaps[jump]
        for a in (points, mu, nu, comp):
            a.setflags(write=False)
        return Grid(points=points, mu=mu, nu=nu, component=comp, timescale=self)

    def function(self, fn: Callable) -> "GridFunction":
        """Sample a vectorised callable on the grid."""
        return GridFunction(self.grid, np.broadcast_to(fn(self.grid.points), len(self.grid)))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ValueError(f"expected {len(self.grid)} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])

    def __len__(self):
        return len(self.values)


# jump operators --------------------------------------------------------------


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t: float) -> float:
    return ts.rho(t)


# derivatives -----------------------------------------------------------------


def delta_derivative(f: GridFunction, i: int) -> float:
    """Δ-derivative at grid index ``i``.

    Exact jump quotient at right-scattered points, forward difference to the
    next grid point at right-dense ones.  At the maximum, which is right-dense
    by convention, the left difference is used if the maximum is left-dense;
    a left-scattered maximum is not in the domain.
    """
    g, v = f.grid, f.values
    n = len(g)
    if not -n <= i < n:
        raise IndexError(i)
    i %= n
    if i < n - 1:
        return float((v[i + 1] - v[i]) / (g.points[i + 1] - g.points[i]))
    if g.nu[i] > 0 or n < 2:
        raise DomainError("Δ-derivative undefined at a left-scattered maximum")
    return float((v[i] - v[i - 1]) / (g.points[i] - g.points[i - 1]))


def nabla_derivative(f: GridFunction, i: int) -> float:
    g, v = f.grid, f.values
    n = len(g)
    if not -n <= i < n:
        raise IndexError(i)
    i %= n
    if i > 0:
        return float((v[i] - v[i - 1]) / (g.points[i] - g.points[i - 1]))
    if g.mu[0] > 0:
        raise DomainError("∇-derivative undefined at a right-scattered minimum")
    return float((v[1] - v[0]) / (g.points[1] - g.points[0]))


def _gradient(values, stencil):
    idx, wts = stencil
    with np.errstate(invalid="ignore"):
        return np.sum(wts * np.asarray(values)[idx], axis=1)


def delta_gradient(f: GridFunction) -> np.ndarray:
    """Δ-derivative at every grid point, second order on dense parts.

    Returns a plain array with NaN where the derivative is undefined (a
    left-scattered maximum).
    """
    return _gradient(f.values, f.grid._delta_stencil)


def nabla_gradient(f: GridFunction) -> np.ndarray:
    return _gradient(f.values, f.grid._nabla_stencil)


# integrals -------------------------------------------------------------------


def _span(grid: Grid, a: float, b: float):
    """Resolve limits into grid cells plus partial dense cells at the ends."""
    ts = grid.timescale
    for x in (a, b):
        if not ts.contains(x):
            raise DomainError(f"integration limit {x!r} is not in the time scale")
    if a > b:
        raise DomainError(f"integration limits out of order: {a!r} > {b!r}")
    t = grid.points

    def split(x):
        try:
            return grid.index_of(x), None
        except DomainError:
            # x lies strictly inside a dense cell [t_j, t_{j+1}]
            j = int(np.searchsorted(t, x)) - 1
            return j, x

    return split(a), split(b)


def _integrate(f: GridFunction, a: float, b: float, weights: np.ndarray) -> float:
    grid, v, t = f.grid, f.values, f.grid.points
    (ia, xa), (ib, xb) = _span(grid, a, b)
    if xa is not None and xb is not None and ia == ib:
        fa, fb = np.interp([xa, xb], t, v)
        return 0.5 * (fa + fb) * (xb - xa)
    terms = []
    lo, hi = ia, ib
    if xa is not None:
        fa = np.interp(xa, t, v)
        terms.append(0.5 * (fa + v[ia + 1]) * (t[ia + 1] - xa))
        lo = ia + 1
    if xb is not None:
        fb = np.interp(xb, t, v)
        terms.append(0.5 * (v[ib] + fb) * (xb - t[ib]))
    w = weights[lo:hi]
    cells = w[:, 0] * v[lo:hi] + w[:, 1] * v[lo + 1 : hi + 1]
    return math.fsum(np.concatenate([cells, terms]))


def delta_integral(f: GridFunction, a: float, b: float) -> float:
    """∫_a^b f Δt: left samples times graininess on gaps, trapezoid on dense cells."""
    return _integrate(f, a, b, f.grid.delta_weights)


def nabla_integral(f: GridFunction, a: float, b: float) -> float:
    """∫_a^b f ∇t: right samples times graininess on gaps, trapezoid on dense cells."""
    return _integrate(f, a, b, f.grid.nabla_weights)


def _antiderivative(f: GridFunction, weights) -> GridFunction:
    v = f.values
    cells = weights[:, 0] * v[:-1] + weights[:, 1] * v[1:]
    return GridFunction(f.grid, np.concatenate([[0.0], np.cumsum(cells)]))


def delta_antiderivative(f: GridFunction) -> GridFunction:
    """The grid function t ↦ ∫_{t_min}^t f Δs (prefix sums, one pass)."""
    return _antiderivative(f, f.grid.delta_weights)


def nabla_antiderivative(f: GridFunction) -> GridFunction:
    return _antiderivative(f, f.grid.nabla_weights)


def max_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))
