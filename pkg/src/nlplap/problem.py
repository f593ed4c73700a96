"""Problem parameters, the p-Laplacian map and the resistivity laws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize

from .errors import HypothesisViolation, InvalidProblem, SchemaError
from .timescale import TimeScale


def phi(s, r):
    """The odd power map |s|^(r-2) s; zero at the origin for every r > 1."""
    s = np.asarray(s, dtype=float)
    out = np.sign(s) * np.abs(s) ** (r - 1.0)
    return float(out) if out.ndim == 0 else out


def conjugate(p: float) -> float:
    return p / (p - 1.0)


def phi_p(s, p):
    return phi(s, p)


def phi_q(s, p):
    """Inverse of ``phi_p(., p)``: the power map for the Hölder conjugate q."""
    return phi(s, conjugate(p))


# nonlinearities --------------------------------------------------------------

EXTREMA_SAMPLES = 1024


@dataclass(frozen=True)
class NTC:
    """Negative-temperature-coefficient resistivity 1/(1+s)^k."""

    k: float = 2.0

    def __call__(self, s):
        return np.power(1.0 + np.asarray(s, dtype=float), -self.k)

    def extrema(self, r):
        return float(self(r)), float(self(0.0))

    def to_dict(self):
        return {"kind": "ntc", "k": self.k}


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __call__(self, s):
        return np.full(np.shape(s), self.c) if np.ndim(s) else self.c

    def extrema(self, r):
        return self.c, self.c

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class Power:
    """c·s^alpha; for alpha > 0 it vanishes at the origin."""

    c: float = 1.0
    alpha: float = 1.0

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self.c * np.power(s, self.alpha)
        return float(out) if out.ndim == 0 else out

    def extrema(self, r):
        lo, hi = float(self(0.0)), float(self(r))
        return (lo, hi) if self.alpha >= 0 else (hi, lo)

    def to_dict(self):
        return {"kind": "power", "c": self.c, "alpha": self.alpha}


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation of (s, f) samples, constant beyond both ends."""

    s: tuple
    f: tuple

    def __post_init__(self):
        s, f = np.asarray(self.s, float), np.asarray(self.f, float)
        if s.ndim != 1 or s.shape != f.shape or len(s) < 1:
            raise InvalidProblem("tabulated 's' and 'f' must be equal-length lists", "/f")
        if np.any(np.diff(s) <= 0):
            raise InvalidProblem("tabulated breakpoints must be strictly increasing", "/f/s")
        if np.any(f <= 0) or not np.all(np.isfinite(f)):
            raise InvalidProblem("tabulated values must be finite and > 0", "/f/f")
        object.__setattr__(self, "s", tuple(s.tolist()))
        object.__setattr__(self, "f", tuple(f.tolist()))

    def __call__(self, s):
        out = np.interp(s, self.s, self.f)
        return float(out) if np.ndim(out) == 0 else out

    def extrema(self, r):
        inside = [x for x in self.s if 0.0 < x < r]
        return sampled_extrema(self, r, extra=inside)

    def to_dict(self):
        return {"kind": "tabulated", "s": list(self.s), "f": list(self.f)}


Nonlinearity = Union[NTC, Constant, Power, Tabulated]


def sampled_extrema(fn, r, extra=()):
    """Min and max of ``fn`` on [0, r] by dense sampling plus golden-section polish.

    The sample set is 1024 uniform points, both endpoints and any ``extra``
    abscissae.  Around the best sample of each kind, one golden-section
    search on the bracketing neighbours refines the value.
    """
    xs = np.union1d(np.linspace(0.0, r, EXTREMA_SAMPLES + 2), np.asarray(extra, float))
    ys = np.asarray(fn(xs), dtype=float)
    found = []
    for sign in (1.0, -1.0):
        j = int(np.argmin(sign * ys))
        best = sign * ys[j]
        if 0 < j < len(xs) - 1:
            res = optimize.minimize_scalar(
                lambda x: sign * float(fn(x)),
                bracket=(xs[j - 1], xs[j], xs[j + 1]),
                method="golden",
            )
            if xs[0] <= res.x <= xs[-1]:
                best = min(best, res.fun)
        found.append(sign * best)
    return found[0], found[1]


def number_field(d, key, where, default=None):
    if key not in d:
        if default is None:
            raise SchemaError(f"missing field '{key}'", f"{where}/{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"'{key}' must be a number", f"{where}/{key}")
    return float(v)


def nonlinearity_from_dict(d, where="/f") -> Nonlinearity:
    if not isinstance(d, dict):
        raise SchemaError("nonlinearity must be an object", where)
    kind = d.get("kind")
    if kind == "ntc":
        k = number_field(d, "k", where)
        if not k >= 2:
            raise InvalidProblem("NTC exponent must satisfy k >= 2", f"{where}/k")
        return NTC(k)
    if kind == "constant":
        c = number_field(d, "c", where)
        if not c > 0:
            raise InvalidProblem("constant nonlinearity needs c > 0", f"{where}/c")
        return Constant(c)
    if kind == "power":
        c, alpha = number_field(d, "c", where), number_field(d, "alpha", where)
        if not c > 0:
            raise InvalidProblem("power nonlinearity needs c > 0", f"{where}/c")
        if not alpha >= 0:
            raise InvalidProblem("power nonlinearity needs alpha >= 0", f"{where}/alpha")
        return Power(c, alpha)
    if kind == "tabulated":
        if not isinstance(d.get("s"), list) or not isinstance(d.get("f"), list):
            raise SchemaError("tabulated nonlinearity needs lists 's' and 'f'", where)
        try:
            return Tabulated(tuple(d["s"]), tuple(d["f"]))
        except InvalidProblem as exc:
            raise InvalidProblem(exc.args[0], where + exc.pointer[2:]) from None
    raise SchemaError(f"unknown nonlinearity kind {kind!r}", f"{where}/kind")


# problem ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Parameters of the nonlocal p-Laplacian problem.

    -(phi_p(u^Δ))^∇ = lam f(u) / (∫_0^T f(u) ∇τ)^k on (0, T),
    phi_p(u^Δ(0)) = beta phi_p(u^Δ(eta)),  u(T) = beta u(eta).
    """

    p: float
    k: float
    lam: float
    beta: float
    eta: float
    timescale: TimeScale
    f: Nonlinearity

    def __post_init__(self):
        if not (self.p > 1 and math.isfinite(self.p)):
            raise InvalidProblem("p-Laplacian exponent must satisfy p > 1", "/p")
        if not (self.k >= 0 and math.isfinite(self.k)):
            raise InvalidProblem("nonlocal exponent must satisfy k >= 0", "/k")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidProblem("lambda must be a finite number >= 0", "/lambda")
        if not 0 < self.beta < 1:
            raise InvalidProblem("transfer coefficient must satisfy 0 < beta < 1", "/beta")
        ts = self.timescale
        if abs(ts.t_min) > 1e-12:
            raise InvalidProblem("time scale must start at 0", "/timescale/components/0")
        if not 0 < self.eta < ts.t_max:
            raise InvalidProblem("eta must satisfy 0 < eta < T", "/eta")
        if not ts.contains(self.eta):
            raise InvalidProblem("eta not in time scale", "/eta")
        if not ts.grid.has_point(self.eta):
            raise InvalidProblem("eta is not a grid point; pass it as a knot", "/eta")

    @property
    def q(self) -> float:
        return conjugate(self.p)

    @property
    def T(self) -> float:
        return self.timescale.t_max

    @property
    def grid(self):
        return self.timescale.grid

    @property
    def eta_index(self) -> int:
        return self.grid.index_of(self.eta)

    def phi_p(self, s):
        return phi(s, self.p)

    def phi_q(self, s):
        return phi(s, self.q)

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return ProblemSpec(self.p, self.k, lam, self.beta, self.eta, self.timescale, self.f)

    def to_dict(self) -> dict:
        return {
            "timescale": self.timescale.to_dict(),
            "p": self.p,
            "k": self.k,
            "lambda": self.lam,
            "beta": self.beta,
            "eta": self.eta,
            "f": self.f.to_dict(),
        }


def eval_f(spec: ProblemSpec, s):
    """f(s) for s >= 0, raising HypothesisViolation unless every value is > 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise HypothesisViolation("nonlinearity evaluated at a negative state")
    out = np.asarray(spec.f(s_arr), dtype=float)
    if not np.all(out > 0) or not np.all(np.isfinite(out)):
        bad = s_arr.flat[int(np.argmin(np.where(np.isfinite(out), out, -np.inf)))]
        raise HypothesisViolation(f"f must be positive and finite; f({bad:g}) = {float(spec.f(bad)):g}")
    return float(out) if out.ndim == 0 else out


def f_extrema(spec: ProblemSpec, r: float) -> tuple:
    """(min, max) of f on [0, r]."""
    if not r > 0:
        raise ValueError("f_extrema needs r > 0")
    return spec.f.extrema(float(r))
